#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "txflow/bowtie.hpp"
#include "txflow/netbuild.hpp"

namespace txflow::hodge {

/// Unordered node pair i < j joined by at least one directed link.
/// net = F_ij = F~_ij - F~_ji (so F_ji = -net), weight = w_ij = A_ij + A_ji.
struct FlowPair {
    std::uint32_t i;
    std::uint32_t j;
    double net;
    double weight;
};

/// Antisymmetric net flow F and symmetric link weight w of a snapshot.
/// Only the i < j half is stored, so antisymmetry and symmetry are exact.
class NetFlowGraph {
public:
    NetFlowGraph(std::vector<std::string> nodes, std::vector<FlowPair> pairs, netbuild::Weight source);

    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::vector<FlowPair>& pairs() const { return pairs_; }
    netbuild::Weight weight_source() const { return source_; }
    std::size_t node_count() const { return nodes_.size(); }

    double net(std::uint32_t i, std::uint32_t j) const;
    double weight(std::uint32_t i, std::uint32_t j) const;

    Eigen::MatrixXd dense_net() const;
    Eigen::MatrixXd dense_weight() const;

private:
    const FlowPair* find(std::uint32_t a, std::uint32_t b) const;

    std::vector<std::string> nodes_;
    std::vector<FlowPair> pairs_;  // sorted by (i, j)
    netbuild::Weight source_;
};

/// F~ is f_ij or g_ij (BTC). Throws std::invalid_argument on self-loops.
NetFlowGraph net_flow(const netbuild::FlowNetwork& network, netbuild::Weight weight);

struct HodgeOptions {
    double rel_tol = 1e-10;
    long max_iter = 100'000;
    // components smaller than this are solved densely
    std::size_t dense_threshold = 500;
};

struct PairDecomposition {
    std::uint32_t i;
    std::uint32_t j;
    double weight;
    double net;
    double gradient;  // w_ij (phi_i - phi_j)
    double circular;  // net - gradient
};

struct HodgeResult {
    std::vector<std::string> nodes;
    Eigen::VectorXd phi;  // mean zero on every connected component
    std::vector<PairDecomposition> pairs;
    std::size_t n_components = 0;
    double residual_norm = 0.0;  // max_i |sum_j F_circ_ij|

    Eigen::MatrixXd dense_gradient() const;
    Eigen::MatrixXd dense_circular() const;
};

/// Solves sum_j L_ij phi_j = sum_j F_ij per connected component of w,
/// fixing the zero mode by a zero mean. Isolated nodes get phi = 0. Throws
/// NumericError if the iterative solver misses its tolerance.
HodgeResult hodge_decompose(const NetFlowGraph& graph, const HodgeOptions& options = {});

struct PotentialHistogram {
    std::vector<double> bin_edges;  // bins + 1 edges; a single bin when all phi coincide
    std::array<std::vector<std::size_t>, bowtie::kClassCount> counts;
    std::array<double, bowtie::kClassCount> mean{};
    std::array<std::size_t, bowtie::kClassCount> members{};
};

/// Histogram of phi per bow-tie class over shared bin edges spanning
/// [min phi, max phi]. The last bin is closed on the right. Node sets of the
/// two results must agree.
PotentialHistogram potential_distribution(const HodgeResult& result, const bowtie::BowTieResult& classes,
                                          std::size_t bins = 20);

/// `user_id,potential,class`; class column empty when `classes` is null.
void write_potential_csv(std::ostream& out, const HodgeResult& result, const bowtie::BowTieResult* classes);
/// `source,destination,flow`, oriented so that flow > 0; zero flows omitted.
void write_flow_csv(std::ostream& out, const HodgeResult& result, bool circular);
void write_histogram_csv(std::ostream& out, const PotentialHistogram& hist);

}  // namespace txflow::hodge
