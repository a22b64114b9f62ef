#include "txflow/netbuild.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "txflow/csv.hpp"
#include "txflow/error.hpp"

namespace txflow::netbuild {

namespace chr = std::chrono;

ResolvedTransfers resolve_transfers(std::span<const ingest::TransferRecord> records,
                                    const ingest::UserClustering& clustering) {
    auto lookup = [&](const std::string& address, const std::string& tx) -> const std::string& {
        const auto* user = clustering.user_of(address);
        if (!user) throw DataError("record '" + tx + "': address '" + address + "' not in clustering");
        return *user;
    };

    ResolvedTransfers out;
    for (const auto& rec : records) {
        const std::string& sender = lookup(rec.inputs.at(0), rec.tx_id);
        bool mixed = false;
        for (std::size_t i = 1; i < rec.inputs.size(); ++i)
            if (lookup(rec.inputs[i], rec.tx_id) != sender) mixed = true;
        if (mixed) {
            out.rejected.push_back({rec.tx_id, "inputs span multiple users"});
            continue;
        }
        for (const auto& o : rec.outputs)
            out.transfers.push_back({sender, lookup(o.address, rec.tx_id), o.amount, rec.timestamp});
    }
    return out;
}

Weight parse_weight(std::string_view name) {
    if (name == "frequency") return Weight::Frequency;
    if (name == "amount") return Weight::Amount;
    throw std::invalid_argument("unknown weight '" + std::string(name) + "' (frequency|amount)");
}

std::string_view to_string(Weight weight) { return weight == Weight::Frequency ? "frequency" : "amount"; }

FlowNetwork::FlowNetwork(Period period, std::vector<UserId> nodes, EdgeMap edges, bool self_loops_removed)
    : period_(period), nodes_(std::move(nodes)), edges_(std::move(edges)), self_loops_removed_(self_loops_removed) {
    index_.reserve(nodes_.size());
    for (std::uint32_t i = 0; i < nodes_.size(); ++i)
        if (!index_.emplace(nodes_[i], i).second)
            throw std::invalid_argument("duplicate node '" + nodes_[i] + "'");
    for (const auto& [key, flow] : edges_) {
        if (key.first >= nodes_.size() || key.second >= nodes_.size())
            throw std::invalid_argument("edge endpoint out of range");
        if (flow.frequency < 1) throw std::invalid_argument("edge frequency must be >= 1");
        if (flow.amount < Amount{}) throw std::invalid_argument("edge amount must be >= 0");
        if (self_loops_removed_ && key.first == key.second)
            throw std::invalid_argument("self-loop present in a network flagged self_loops_removed");
    }
}

std::size_t FlowNetwork::self_loop_count() const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [](const auto& e) { return e.first.first == e.first.second; }));
}

Amount FlowNetwork::total_amount() const {
    Amount sum;
    for (const auto& [key, flow] : edges_) sum += flow.amount;
    return sum;
}

std::optional<std::uint32_t> FlowNetwork::index_of(std::string_view user) const {
    auto it = index_.find(std::string(user));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const EdgeFlow* FlowNetwork::edge(std::string_view source, std::string_view destination) const {
    auto s = index_of(source), d = index_of(destination);
    if (!s || !d) return nullptr;
    auto it = edges_.find({*s, *d});
    return it == edges_.end() ? nullptr : &it->second;
}

FlowNetwork aggregate(std::span<const UserTransfer> transfers, const Period& period, TimeScale scale) {
    if (!period.aligned_to(scale))
        throw std::invalid_argument("period " + period.label() + " is not aligned to scale " + to_string(scale));

    std::set<UserId> users;
    for (const auto& t : transfers) {
        if (!period.contains(t.timestamp)) continue;
        users.insert(t.source);
        users.insert(t.destination);
    }
    std::vector<UserId> nodes(users.begin(), users.end());
    std::unordered_map<std::string_view, std::uint32_t> index;
    for (std::uint32_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i], i);

    EdgeMap edges;
    for (const auto& t : transfers) {
        if (!period.contains(t.timestamp)) continue;
        auto& flow = edges[{index.at(t.source), index.at(t.destination)}];
        flow.frequency += 1;
        flow.amount += t.amount;
    }
    return FlowNetwork(period, std::move(nodes), std::move(edges), false);
}

std::set<UserId> select_regular_users(std::span<const UserTransfer> transfers, const Period& period) {
    const auto days = period.days();
    std::set<UserId> regular;
    if (days.empty()) return regular;
    const auto first_day = days.front();

    std::map<UserId, std::vector<bool>> seen;
    auto mark = [&](const UserId& user, std::size_t day) {
        auto& bits = seen[user];
        if (bits.empty()) bits.assign(days.size(), false);
        bits[day] = true;
    };
    for (const auto& t : transfers) {
        if (t.is_self_loop() || !period.contains(t.timestamp)) continue;
        const auto day = static_cast<std::size_t>((chr::floor<chr::days>(t.timestamp) - first_day).count());
        mark(t.source, day);
        mark(t.destination, day);
    }
    for (const auto& [user, bits] : seen)
        if (std::all_of(bits.begin(), bits.end(), [](bool b) { return b; })) regular.insert(user);
    return regular;
}

FlowNetwork restrict(const FlowNetwork& network, const std::set<UserId>& users, bool drop_self_loops) {
    std::vector<UserId> nodes;
    std::vector<std::int64_t> remap(network.node_count(), -1);
    for (std::uint32_t i = 0; i < network.node_count(); ++i) {
        if (!users.contains(network.nodes()[i])) continue;
        remap[i] = static_cast<std::int64_t>(nodes.size());
        nodes.push_back(network.nodes()[i]);
    }
    EdgeMap edges;
    for (const auto& [key, flow] : network.edges()) {
        if (remap[key.first] < 0 || remap[key.second] < 0) continue;
        if (drop_self_loops && key.first == key.second) continue;
        edges.emplace(EdgeKey{static_cast<std::uint32_t>(remap[key.first]), static_cast<std::uint32_t>(remap[key.second])},
                      flow);
    }
    return FlowNetwork(network.period(), std::move(nodes), std::move(edges),
                       drop_self_loops || network.self_loops_removed());
}

std::vector<ActivityProfile> activity_profiles(std::span<const UserTransfer> transfers,
                                               std::span<const UserId> users) {
    std::vector<ActivityProfile> profiles(users.size());
    std::unordered_map<std::string_view, std::size_t> slot;
    for (std::size_t i = 0; i < users.size(); ++i) {
        profiles[i].user = users[i];
        slot.emplace(profiles[i].user, i);
    }
    for (const auto& t : transfers) {
        const int h = utc_hour(t.timestamp);
        if (t.is_self_loop()) {
            if (auto it = slot.find(t.source); it != slot.end()) profiles[it->second].self[h] += 1;
            continue;
        }
        if (auto it = slot.find(t.source); it != slot.end()) profiles[it->second].out[h] += 1;
        if (auto it = slot.find(t.destination); it != slot.end()) profiles[it->second].in[h] += 1;
    }
    for (auto& p : profiles) {
        for (int h = 0; h < 24; ++h) p.total[h] = p.out[h] + p.in[h] + p.self[h];
        p.peak_hour = static_cast<int>(std::max_element(p.total.begin(), p.total.end()) - p.total.begin());
    }
    return profiles;
}

LabeledMatrix export_adjacency(const FlowNetwork& network, Weight weight, std::size_t dense_limit) {
    const auto n = network.node_count();
    if (n > dense_limit)
        throw std::invalid_argument("network has " + std::to_string(n) + " nodes, above the dense limit of " +
                                    std::to_string(dense_limit) + "; use the sparse edge-list export instead");
    LabeledMatrix m{network.nodes(), network.nodes(),
                    Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    for (const auto& [key, flow] : network.edges())
        m.values(key.first, key.second) =
            weight == Weight::Frequency ? static_cast<double>(flow.frequency) : flow.amount.to_btc();
    return m;
}

Overlap overlap(const FlowNetwork& a, const FlowNetwork& b) {
    Overlap o;
    for (const auto& id : a.nodes())
        if (b.index_of(id)) ++o.common_nodes;
    for (const auto& [key, flow] : a.edges())
        if (b.edge(a.nodes()[key.first], a.nodes()[key.second])) ++o.common_edges;
    return o;
}

void write_snapshot(const std::filesystem::path& dir, const FlowNetwork& network) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "nodes.csv");
        out << "user_id\n";
        for (const auto& id : network.nodes()) csv::write_row(out, {id});
    }
    {
        std::ofstream out(dir / "edges.csv");
        out << "source,destination,frequency,amount\n";
        for (const auto& [key, flow] : network.edges())
            csv::write_row(out, {network.nodes()[key.first], network.nodes()[key.second],
                                 std::to_string(flow.frequency), flow.amount.to_string()});
    }
    nlohmann::ordered_json meta;
    meta["period"] = network.period().label();
    meta["start"] = format_timestamp(network.period().start);
    meta["end"] = format_timestamp(network.period().end);
    meta["self_loops_removed"] = network.self_loops_removed();
    std::ofstream(dir / "snapshot.json") << meta.dump(2) << '\n';
}

FlowNetwork read_snapshot(const std::filesystem::path& dir) {
    std::ifstream nodes_in(dir / "nodes.csv"), edges_in(dir / "edges.csv");
    if (!nodes_in || !edges_in) throw DataError("snapshot directory " + dir.string() + " lacks nodes.csv/edges.csv");

    Period period{};
    bool removed = false;
    if (std::ifstream meta_in(dir / "snapshot.json"); meta_in) {
        auto meta = nlohmann::json::parse(meta_in);
        period = {parse_timestamp(meta.at("start").get<std::string>()), parse_timestamp(meta.at("end").get<std::string>())};
        removed = meta.value("self_loops_removed", false);
    }

    std::vector<UserId> nodes;
    std::unordered_map<std::string, std::uint32_t> index;
    std::string line;
    bool header = true;
    while (std::getline(nodes_in, line)) {
        if (csv::trim(line).empty()) continue;
        auto fields = csv::split_line(line);
        if (header) {
            header = false;
            if (fields[0] == "user_id") continue;
        }
        index.emplace(fields[0], static_cast<std::uint32_t>(nodes.size()));
        nodes.push_back(fields[0]);
    }

    EdgeMap edges;
    header = true;
    std::size_t lineno = 0;
    while (std::getline(edges_in, line)) {
        ++lineno;
        if (csv::trim(line).empty()) continue;
        auto fields = csv::split_line(line);
        if (header) {
            header = false;
            if (fields[0] == "source") continue;
        }
        if (fields.size() != 4) throw DataError("edges.csv line " + std::to_string(lineno) + ": expected 4 fields");
        auto s = index.find(fields[0]), d = index.find(fields[1]);
        if (s == index.end() || d == index.end())
            throw DataError("edges.csv line " + std::to_string(lineno) + ": endpoint not listed in nodes.csv");
        EdgeFlow flow{std::stoll(fields[2]), Amount::parse(csv::trim(fields[3]))};
        if (!edges.emplace(EdgeKey{s->second, d->second}, flow).second)
            throw DataError("edges.csv line " + std::to_string(lineno) + ": duplicate edge");
    }
    return FlowNetwork(period, std::move(nodes), std::move(edges), removed);
}

}  // namespace txflow::netbuild
