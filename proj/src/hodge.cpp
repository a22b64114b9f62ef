#include "txflow/hodge.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "txflow/csv.hpp"
#include "txflow/disjoint_set.hpp"
#include "txflow/error.hpp"
#include "txflow/kernels.hpp"

namespace txflow::hodge {

NetFlowGraph::NetFlowGraph(std::vector<std::string> nodes, std::vector<FlowPair> pairs, netbuild::Weight source)
    : nodes_(std::move(nodes)), pairs_(std::move(pairs)), source_(source) {
    for (auto& p : pairs_) {
        if (p.i == p.j || p.i >= nodes_.size() || p.j >= nodes_.size())
            throw std::invalid_argument("invalid node pair in net flow graph");
        if (p.i > p.j) {
            std::swap(p.i, p.j);
            p.net = -p.net;
        }
        if (p.weight <= 0.0) throw std::invalid_argument("net flow pair without a link");
    }
    std::sort(pairs_.begin(), pairs_.end(),
              [](const FlowPair& a, const FlowPair& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    for (std::size_t k = 1; k < pairs_.size(); ++k)
        if (pairs_[k].i == pairs_[k - 1].i && pairs_[k].j == pairs_[k - 1].j)
            throw std::invalid_argument("duplicate node pair in net flow graph");
}

const FlowPair* NetFlowGraph::find(std::uint32_t a, std::uint32_t b) const {
    auto it = std::lower_bound(pairs_.begin(), pairs_.end(), std::pair{a, b}, [](const FlowPair& p, const auto& key) {
        return std::tie(p.i, p.j) < std::tie(key.first, key.second);
    });
    if (it == pairs_.end() || it->i != a || it->j != b) return nullptr;
    return &*it;
}

double NetFlowGraph::net(std::uint32_t i, std::uint32_t j) const {
    if (i == j) return 0.0;
    if (i < j) {
        const auto* p = find(i, j);
        return p ? p->net : 0.0;
    }
    const auto* p = find(j, i);
    return p ? -p->net : 0.0;
}

double NetFlowGraph::weight(std::uint32_t i, std::uint32_t j) const {
    if (i == j) return 0.0;
    const auto* p = i < j ? find(i, j) : find(j, i);
    return p ? p->weight : 0.0;
}

Eigen::MatrixXd NetFlowGraph::dense_net() const {
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : pairs_) {
        F(p.i, p.j) = p.net;
        F(p.j, p.i) = -p.net;
    }
    return F;
}

Eigen::MatrixXd NetFlowGraph::dense_weight() const {
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : pairs_) w(p.i, p.j) = w(p.j, p.i) = p.weight;
    return w;
}

NetFlowGraph net_flow(const netbuild::FlowNetwork& network, netbuild::Weight weight) {
    if (network.has_self_loops()) throw std::invalid_argument("net flow requires self-loops to be removed");
    std::map<std::pair<std::uint32_t, std::uint32_t>, FlowPair> acc;
    for (const auto& [key, flow] : network.edges()) {
        const double value =
            weight == netbuild::Weight::Frequency ? static_cast<double>(flow.frequency) : flow.amount.to_btc();
        const auto i = std::min(key.first, key.second), j = std::max(key.first, key.second);
        auto& p = acc.try_emplace({i, j}, FlowPair{i, j, 0.0, 0.0}).first->second;
        p.net += key.first == i ? value : -value;
        p.weight += 1.0;
    }
    std::vector<FlowPair> pairs;
    pairs.reserve(acc.size());
    for (auto& [key, p] : acc) pairs.push_back(p);
    return NetFlowGraph(network.nodes(), std::move(pairs), weight);
}

namespace {

/// Mean-zero solution of L x = b on one connected component.
Eigen::VectorXd solve_dense(const kernels::LaplacianCsr& L, const Eigen::VectorXd& b) {
    const auto n = static_cast<Eigen::Index>(L.size());
    // L + 11^T/n is positive definite and shares L's solution on mean-zero b.
    Eigen::MatrixXd A = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, i) += L.degree[static_cast<std::size_t>(i)];
        for (auto p = L.row_ptr[static_cast<std::size_t>(i)]; p < L.row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
            A(i, L.col[static_cast<std::size_t>(p)]) -= L.weight[static_cast<std::size_t>(p)];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw NumericError("Laplacian factorization failed", 0.0);
    Eigen::VectorXd x = llt.solve(b);
    x.array() -= x.mean();
    return x;
}

Eigen::VectorXd solve_cg(const kernels::LaplacianCsr& L, const Eigen::VectorXd& b, const HodgeOptions& opt) {
    const auto n = static_cast<Eigen::Index>(L.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) return x;

    auto apply = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
        kernels::laplacian_apply(L, {v.data(), static_cast<std::size_t>(n)}, {out.data(), static_cast<std::size_t>(n)});
    };
    Eigen::VectorXd r = b, p, Ap(n);
    r.array() -= r.mean();
    p = r;
    double rr = r.squaredNorm();
    long it = 0;
    for (; it < opt.max_iter && std::sqrt(rr) > opt.rel_tol * bnorm; ++it) {
        apply(p, Ap);
        const double pAp = p.dot(Ap);
        if (pAp <= 0.0) break;
        const double alpha = rr / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        r.array() -= r.mean();
        const double rr_next = r.squaredNorm();
        p = r + (rr_next / rr) * p;
        rr = rr_next;
    }
    x.array() -= x.mean();
    Eigen::VectorXd check(n);
    apply(x, check);
    const double residual = (b - check).norm() / bnorm;
    if (!(residual <= 10.0 * opt.rel_tol))
        throw NumericError("conjugate gradient stopped after " + std::to_string(it) +
                               " iterations with relative residual " + csv::format_double(residual),
                           residual);
    return x;
}

}  // namespace

HodgeResult hodge_decompose(const NetFlowGraph& graph, const HodgeOptions& options) {
    const auto n = static_cast<std::uint32_t>(graph.node_count());
    HodgeResult result;
    result.nodes = graph.nodes();
    result.phi = Eigen::VectorXd::Zero(n);

    DisjointSet comps(n);
    for (const auto& p : graph.pairs()) comps.unite(p.i, p.j);

    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> members;
    std::vector<std::uint32_t> order;  // component roots by first member
    for (std::uint32_t v = 0; v < n; ++v) {
        auto [it, fresh] = members.try_emplace(comps.find(v));
        if (fresh) order.push_back(it->first);
        it->second.push_back(v);
    }
    result.n_components = order.size();

    std::vector<std::uint32_t> local(n, 0);
    std::unordered_map<std::uint32_t, std::vector<kernels::WeightedPair>> comp_pairs;
    for (const auto& [root, nodes] : members)
        for (std::uint32_t k = 0; k < nodes.size(); ++k) local[nodes[k]] = k;
    for (const auto& p : graph.pairs()) comp_pairs[comps.find(p.i)].push_back({local[p.i], local[p.j], p.weight});

    // divergence b_i = sum_j F_ij
    Eigen::VectorXd divergence = Eigen::VectorXd::Zero(n);
    for (const auto& p : graph.pairs()) {
        divergence(p.i) += p.net;
        divergence(p.j) -= p.net;
    }

    for (auto root : order) {
        const auto& nodes = members.at(root);
        if (nodes.size() < 2) continue;
        const auto L = kernels::build_laplacian(nodes.size(), comp_pairs[root]);
        Eigen::VectorXd b(static_cast<Eigen::Index>(nodes.size()));
        for (std::size_t k = 0; k < nodes.size(); ++k) b(static_cast<Eigen::Index>(k)) = divergence(nodes[k]);
        const Eigen::VectorXd x = nodes.size() < options.dense_threshold ? solve_dense(L, b) : solve_cg(L, b, options);
        for (std::size_t k = 0; k < nodes.size(); ++k) result.phi(nodes[k]) = x(static_cast<Eigen::Index>(k));
    }

    Eigen::VectorXd circ_div = Eigen::VectorXd::Zero(n);
    result.pairs.reserve(graph.pairs().size());
    for (const auto& p : graph.pairs()) {
        const double grad = p.weight * (result.phi(p.i) - result.phi(p.j));
        const double circ = p.net - grad;
        result.pairs.push_back({p.i, p.j, p.weight, p.net, grad, circ});
        circ_div(p.i) += circ;
        circ_div(p.j) -= circ;
    }
    result.residual_norm = n ? circ_div.cwiseAbs().maxCoeff() : 0.0;
    return result;
}

Eigen::MatrixXd HodgeResult::dense_gradient() const {
    const auto n = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : pairs) {
        G(p.i, p.j) = p.gradient;
        G(p.j, p.i) = -p.gradient;
    }
    return G;
}

Eigen::MatrixXd HodgeResult::dense_circular() const {
    const auto n = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : pairs) {
        C(p.i, p.j) = p.circular;
        C(p.j, p.i) = -p.circular;
    }
    return C;
}

PotentialHistogram potential_distribution(const HodgeResult& result, const bowtie::BowTieResult& classes,
                                          std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
    if (classes.nodes.size() != result.nodes.size())
        throw std::invalid_argument("Hodge and bow-tie results cover different node sets");
    std::unordered_map<std::string_view, bowtie::NodeClass> class_of;
    for (std::size_t i = 0; i < classes.nodes.size(); ++i) class_of.emplace(classes.nodes[i], classes.assignment[i]);

    PotentialHistogram hist;
    const auto n = result.nodes.size();
    double lo = 0.0, hi = 0.0;
    if (n) {
        lo = result.phi.minCoeff();
        hi = result.phi.maxCoeff();
    }
    if (hi == lo) bins = 1;
    hist.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
        hist.bin_edges[b] = bins == 1 && hi == lo ? lo : lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    for (auto& c : hist.counts) c.assign(bins, 0);

    std::array<double, bowtie::kClassCount> sums{};
    for (std::size_t i = 0; i < n; ++i) {
        auto it = class_of.find(result.nodes[i]);
        if (it == class_of.end())
            throw std::invalid_argument("user '" + result.nodes[i] + "' missing from bow-tie result");
        const auto c = static_cast<std::size_t>(it->second);
        const double v = result.phi(static_cast<Eigen::Index>(i));
        std::size_t b = 0;
        if (hi > lo) b = std::min(bins - 1, static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins)));
        ++hist.counts[c][b];
        ++hist.members[c];
        sums[c] += v;
    }
    for (std::size_t c = 0; c < bowtie::kClassCount; ++c)
        hist.mean[c] = hist.members[c] ? sums[c] / static_cast<double>(hist.members[c]) : 0.0;
    return hist;
}

void write_potential_csv(std::ostream& out, const HodgeResult& result, const bowtie::BowTieResult* classes) {
    out << "user_id,potential,class\n";
    for (std::size_t i = 0; i < result.nodes.size(); ++i) {
        std::string cls;
        if (classes) cls = std::string(bowtie::to_string(classes->assignment.at(i)));
        csv::write_row(out, {result.nodes[i], csv::format_double(result.phi(static_cast<Eigen::Index>(i))), cls});
    }
}

void write_flow_csv(std::ostream& out, const HodgeResult& result, bool circular) {
    double scale = 0.0;
    for (const auto& p : result.pairs) scale = std::max(scale, std::abs(p.net));
    const double cutoff = 1e-12 * scale;
    out << "source,destination,flow\n";
    for (const auto& p : result.pairs) {
        const double f = circular ? p.circular : p.gradient;
        if (std::abs(f) <= cutoff) continue;
        const bool forward = f > 0;
        csv::write_row(out, {result.nodes[forward ? p.i : p.j], result.nodes[forward ? p.j : p.i],
                             csv::format_double(std::abs(f))});
    }
}

void write_histogram_csv(std::ostream& out, const PotentialHistogram& hist) {
    out << "bin_lo,bin_hi";
    for (auto c : bowtie::kAllClasses) out << ',' << bowtie::to_string(c);
    out << '\n';
    const auto bins = hist.bin_edges.size() - 1;
    for (std::size_t b = 0; b < bins; ++b) {
        out << csv::format_double(hist.bin_edges[b]) << ',' << csv::format_double(hist.bin_edges[b + 1]);
        for (std::size_t c = 0; c < bowtie::kClassCount; ++c) out << ',' << hist.counts[c][b];
        out << '\n';
    }
}

}  // namespace txflow::hodge
