#include <random>
#include <stdexcept>

#include "txflow/modelsel.hpp"

namespace txflow::modelsel {

namespace {

Eigen::VectorXd sample_dirichlet(std::size_t dim, double concentration, std::mt19937_64& rng) {
    std::gamma_distribution<double> gamma(concentration, 1.0);
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = gamma(rng);
    const double sum = x.sum();
    if (sum > 0.0) return x / sum;
    // every gamma draw underflowed: the Dirichlet mass sits on a vertex
    std::uniform_int_distribution<Eigen::Index> pick(0, x.size() - 1);
    x.setZero();
    x(pick(rng)) = 1.0;
    return x;
}

std::discrete_distribution<Eigen::Index> categorical(const Eigen::VectorXd& p) {
    return std::discrete_distribution<Eigen::Index>(p.data(), p.data() + p.size());
}

}  // namespace

LabeledMatrix SyntheticCorpus::as_matrix() const {
    LabeledMatrix m;
    for (Eigen::Index d = 0; d < counts.rows(); ++d) m.row_ids.push_back("d" + std::to_string(d));
    for (Eigen::Index v = 0; v < counts.cols(); ++v) m.col_ids.push_back("v" + std::to_string(v));
    m.values = counts.cast<double>();
    return m;
}

SyntheticCorpus generate_lda(const LdaParams& p) {
    if (p.documents == 0 || p.vocabulary == 0 || p.topics == 0 || p.doc_length == 0)
        throw std::invalid_argument("LDA dimensions must all be >= 1");
    if (!(p.alpha > 0.0) || !(p.beta > 0.0)) throw std::invalid_argument("LDA priors alpha and beta must be > 0");

    std::mt19937_64 rng(p.seed);
    SyntheticCorpus c;
    c.true_K = p.topics;
    c.alpha = p.alpha;
    c.beta = p.beta;
    c.seed = p.seed;
    const auto D = static_cast<Eigen::Index>(p.documents), V = static_cast<Eigen::Index>(p.vocabulary),
               K = static_cast<Eigen::Index>(p.topics);

    c.phi.resize(K, V);
    for (Eigen::Index k = 0; k < K; ++k) c.phi.row(k) = sample_dirichlet(p.vocabulary, p.beta, rng).transpose();
    std::vector<std::discrete_distribution<Eigen::Index>> word_of_topic;
    for (Eigen::Index k = 0; k < K; ++k) word_of_topic.push_back(categorical(c.phi.row(k).transpose()));

    c.theta.resize(D, K);
    c.counts = CountMatrix::Zero(D, V);
    for (Eigen::Index d = 0; d < D; ++d) {
        c.theta.row(d) = sample_dirichlet(p.topics, p.alpha, rng).transpose();
        auto topic = categorical(c.theta.row(d).transpose());
        for (std::size_t n = 0; n < p.doc_length; ++n) {
            const auto z = topic(rng);
            const auto w = word_of_topic[static_cast<std::size_t>(z)](rng);
            ++c.counts(d, w);
        }
    }
    return c;
}

}  // namespace txflow::modelsel
