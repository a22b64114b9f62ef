#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "txflow/amount.hpp"
#include "txflow/ingest.hpp"
#include "txflow/matrix_io.hpp"
#include "txflow/timeutil.hpp"

namespace txflow::netbuild {

using UserId = std::string;

struct UserTransfer {
    UserId source;
    UserId destination;
    Amount amount;
    Timestamp timestamp;

    bool is_self_loop() const { return source == destination; }
};

struct RejectedRecord {
    std::string tx_id;
    std::string reason;
};

struct ResolvedTransfers {
    std::vector<UserTransfer> transfers;
    std::vector<RejectedRecord> rejected;
};

/// One transfer per output of each record, from the (single) user owning the
/// inputs to the user owning the output address. Outputs paid back to the
/// sending user become self-loops. Records whose inputs span several users
/// are rejected. An address missing from the clustering throws DataError.
ResolvedTransfers resolve_transfers(std::span<const ingest::TransferRecord> records,
                                    const ingest::UserClustering& clustering);

enum class Weight { Frequency, Amount };

Weight parse_weight(std::string_view name);
std::string_view to_string(Weight weight);

struct EdgeFlow {
    std::int64_t frequency = 0;
    Amount amount;

    friend bool operator==(const EdgeFlow&, const EdgeFlow&) = default;
};

/// (source index, destination index) into FlowNetwork::nodes().
using EdgeKey = std::pair<std::uint32_t, std::uint32_t>;
using EdgeMap = std::map<EdgeKey, EdgeFlow>;

/// Aggregated snapshot of transfers over one period. Immutable.
class FlowNetwork {
public:
    FlowNetwork() = default;

    /// Validates: unique node ids, edge endpoints in range, frequency >= 1,
    /// no (i,i) edge when self_loops_removed. Throws std::invalid_argument.
    FlowNetwork(Period period, std::vector<UserId> nodes, EdgeMap edges, bool self_loops_removed);

    const Period& period() const { return period_; }
    const std::vector<UserId>& nodes() const { return nodes_; }
    const EdgeMap& edges() const { return edges_; }
    bool self_loops_removed() const { return self_loops_removed_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t self_loop_count() const;
    bool has_self_loops() const { return self_loop_count() > 0; }
    Amount total_amount() const;

    std::optional<std::uint32_t> index_of(std::string_view user) const;
    const EdgeFlow* edge(std::string_view source, std::string_view destination) const;

private:
    Period period_{};
    std::vector<UserId> nodes_;
    EdgeMap edges_;
    bool self_loops_removed_ = false;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// f_ij = number of transfers i->j in the period, g_ij = summed amount. Nodes
/// are every user incident to a transfer, sorted by id. Self-loops are kept.
FlowNetwork aggregate(std::span<const UserTransfer> transfers, const Period& period, TimeScale scale);

/// Users that send or receive at least one non-self-loop transfer on every
/// UTC day of the period.
std::set<UserId> select_regular_users(std::span<const UserTransfer> transfers, const Period& period);

/// Induced subgraph on `users` (intersected with the network's nodes).
FlowNetwork restrict(const FlowNetwork& network, const std::set<UserId>& users, bool drop_self_loops);

struct ActivityProfile {
    UserId user;
    std::array<std::int64_t, 24> out{};
    std::array<std::int64_t, 24> in{};
    std::array<std::int64_t, 24> self{};
    std::array<std::int64_t, 24> total{};
    int peak_hour = 0;
};

/// Per-user 24-bin UTC histograms; peak_hour is the smallest hour attaining
/// the maximum total.
std::vector<ActivityProfile> activity_profiles(std::span<const UserTransfer> transfers,
                                               std::span<const UserId> users);

inline constexpr std::size_t kDefaultDenseLimit = 5000;

/// X_sd = f_sd (or g_sd in BTC) with rows/columns in node order.
LabeledMatrix export_adjacency(const FlowNetwork& network, Weight weight,
                               std::size_t dense_limit = kDefaultDenseLimit);

struct Overlap {
    std::size_t common_nodes = 0;
    std::size_t common_edges = 0;
};

/// |V_a ∩ V_b| and |E_a ∩ E_b|, edges matched by user ids.
Overlap overlap(const FlowNetwork& a, const FlowNetwork& b);

// Snapshot directory: nodes.csv (`user_id`), edges.csv
// (`source,destination,frequency,amount`), snapshot.json (period, flags).
void write_snapshot(const std::filesystem::path& dir, const FlowNetwork& network);
FlowNetwork read_snapshot(const std::filesystem::path& dir);

}  // namespace txflow::netbuild
