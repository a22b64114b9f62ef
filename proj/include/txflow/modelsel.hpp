#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "txflow/matrix_io.hpp"
#include "txflow/nmf.hpp"

namespace txflow::modelsel {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct LdaParams {
    std::size_t documents = 0;
    std::size_t vocabulary = 0;
    std::size_t topics = 0;
    double alpha = 0.1;  // symmetric Dirichlet prior on topic mixtures
    double beta = 0.1;   // symmetric Dirichlet prior on term distributions
    std::size_t doc_length = 0;
    std::uint64_t seed = 0;
};

/// Corpus drawn from the LDA generative process.
struct SyntheticCorpus {
    std::size_t true_K = 0;
    Eigen::MatrixXd theta;  // documents x topics, rows on the simplex
    Eigen::MatrixXd phi;    // topics x vocabulary, rows on the simplex
    CountMatrix counts;     // documents x vocabulary
    double alpha = 0.0;
    double beta = 0.0;
    std::uint64_t seed = 0;

    /// lambda = theta phi, the per-document term probabilities.
    Eigen::MatrixXd lambda() const { return theta * phi; }
    /// counts as doubles, rows d0.., columns v0..
    LabeledMatrix as_matrix() const;
};

/// phi_k ~ Dir(beta), theta_d ~ Dir(alpha), then for each of the doc_length
/// words of document d: z ~ Cat(theta_d), w ~ Cat(phi_z). Throws
/// std::invalid_argument for zero dimensions or non-positive priors.
SyntheticCorpus generate_lda(const LdaParams& params);

/// Mean pairwise cosine similarity of the normalized destination rows
/// (lower is better). Requires K >= 2.
double coherence_cao(const nmf::NmfModel& model);

/// Symmetric KL divergence between the L1-normalized singular values of the
/// normalized destination factor and the L1-normalized vector l^T S~, where
/// l holds the row sums of X (lower is better). Both vectors are compared
/// in descending order.
double coherence_arun(const Eigen::MatrixXd& X, const nmf::NmfModel& model);

/// Mean pairwise Jensen-Shannon divergence of the normalized destination
/// rows (higher is better). Requires K >= 2.
double coherence_deveaud(const nmf::NmfModel& model);

enum class Metric { CaoJuan2009, Arun2010, Deveaud2014 };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

struct MetricSummary {
    Metric metric;
    // all indexed like CoherenceReport::k_values; Deveaud is stored negated
    std::vector<double> mean;
    std::vector<double> se;
    std::vector<double> scaled;
    std::vector<std::size_t> runs_ok;
    std::size_t chosen_k = 0;
    bool constant = false;  // every mean equal; scaled set to 0
};

struct CoherenceReport {
    std::vector<std::size_t> k_values;
    std::size_t runs_per_k = 0;
    std::vector<MetricSummary> metrics;
    std::size_t consensus_k = 0;
    std::vector<std::string> failures;  // excluded fits

    const MetricSummary& summary(Metric metric) const;
};

struct SelectKOptions {
    std::vector<std::size_t> k_values;
    std::size_t runs_per_k = 20;
    /// One seed per run; if fewer are given, seeds continue from the last
    /// one (seed + 1, seed + 2, ...). Empty means starting at 0.
    std::vector<std::uint64_t> seeds;
    std::vector<Metric> metrics{Metric::CaoJuan2009, Metric::Arun2010, Metric::Deveaud2014};
    nmf::NmfOptions nmf;
};

inline constexpr double kBandZ = 2.576;  // two-sided 99% normal quantile

/// Fits NMF for every (K, run) pair, scores each fit, and aggregates mean,
/// standard error and min-max scaled mean per metric. chosen_k minimises the
/// scaled mean (smallest K on ties); consensus_k follows Arun2010.
CoherenceReport select_k(const Eigen::MatrixXd& X, const SelectKOptions& options);

/// `metric,k,mean,se,scaled,lower,upper` with lower/upper = mean -+ 2.576 se.
void write_report_csv(std::ostream& out, const CoherenceReport& report);
std::string report_json(const CoherenceReport& report);

}  // namespace txflow::modelsel
