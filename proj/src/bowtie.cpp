#include "txflow/bowtie.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "txflow/csv.hpp"
#include "txflow/disjoint_set.hpp"

namespace txflow::bowtie {

std::string_view to_string(NodeClass c) {
    switch (c) {
        case NodeClass::GSCC: return "GSCC";
        case NodeClass::IN: return "IN";
        case NodeClass::OUT: return "OUT";
        case NodeClass::TE: return "TE";
        case NodeClass::DISCONNECTED: return "DISCONNECTED";
    }
    return "?";
}

NodeClass parse_node_class(std::string_view name) {
    for (auto c : kAllClasses)
        if (to_string(c) == name) return c;
    throw std::invalid_argument("unknown bow-tie class '" + std::string(name) + "'");
}

NodeClass BowTieResult::class_of(std::string_view user) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i] == user) return assignment[i];
    throw std::out_of_range("user '" + std::string(user) + "' not in bow-tie result");
}

namespace {

using Adjacency = std::vector<std::vector<std::uint32_t>>;

/// Iterative Tarjan. Returns component index per node.
std::vector<std::uint32_t> strongly_connected(const Adjacency& succ, std::uint32_t& n_components) {
    const auto n = static_cast<std::uint32_t>(succ.size());
    constexpr std::uint32_t kUnvisited = ~0u;
    std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
    std::vector<std::uint32_t> stack;
    std::vector<bool> on_stack(n, false);
    std::vector<std::pair<std::uint32_t, std::size_t>> call;  // (node, next child)
    std::uint32_t counter = 0;
    n_components = 0;

    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        call.emplace_back(root, 0);
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, child] = call.back();
            if (child < succ[v].size()) {
                const auto w = succ[v][child++];
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const auto done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done]) {
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = n_components;
                } while (w != done);
                ++n_components;
            }
        }
    }
    return comp;
}

void bfs(const Adjacency& adj, const std::vector<std::uint32_t>& sources, std::vector<bool>& seen) {
    std::deque<std::uint32_t> queue(sources.begin(), sources.end());
    for (auto s : sources) seen[s] = true;
    while (!queue.empty()) {
        const auto v = queue.front();
        queue.pop_front();
        for (auto w : adj[v])
            if (!seen[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
    }
}

/// Picks the largest group; ties go to the group whose smallest member id is
/// lexicographically smallest.
template <class Label>
std::uint32_t largest_group(const std::vector<Label>& label, std::uint32_t n_groups,
                            const std::vector<std::string>& ids, const std::vector<bool>* mask = nullptr) {
    std::vector<std::size_t> size(n_groups, 0);
    std::vector<const std::string*> smallest(n_groups, nullptr);
    for (std::size_t v = 0; v < label.size(); ++v) {
        if (mask && !(*mask)[v]) continue;
        const auto g = static_cast<std::uint32_t>(label[v]);
        ++size[g];
        if (!smallest[g] || ids[v] < *smallest[g]) smallest[g] = &ids[v];
    }
    std::uint32_t best = 0;
    bool found = false;
    for (std::uint32_t g = 0; g < n_groups; ++g) {
        if (size[g] == 0) continue;
        if (!found || size[g] > size[best] || (size[g] == size[best] && *smallest[g] < *smallest[best])) {
            best = g;
            found = true;
        }
    }
    return best;
}

}  // namespace

BowTieResult bowtie_decompose(const netbuild::FlowNetwork& network) {
    if (network.has_self_loops())
        throw std::invalid_argument("bow-tie decomposition requires self-loops to be removed first");

    BowTieResult result;
    result.nodes = network.nodes();
    const auto n = static_cast<std::uint32_t>(network.node_count());
    result.assignment.assign(n, NodeClass::DISCONNECTED);
    if (n == 0) return result;

    Adjacency succ(n), pred(n);
    DisjointSet weak(n);
    for (const auto& [key, flow] : network.edges()) {
        succ[key.first].push_back(key.second);
        pred[key.second].push_back(key.first);
        weak.unite(key.first, key.second);
    }

    std::unordered_map<std::uint32_t, std::uint32_t> weak_label_of_root;
    std::vector<std::uint32_t> weak_label(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        auto [it, fresh] = weak_label_of_root.emplace(weak.find(v), static_cast<std::uint32_t>(weak_label_of_root.size()));
        weak_label[v] = it->second;
    }
    const auto n_weak = static_cast<std::uint32_t>(weak_label_of_root.size());
    result.n_weak_components = n_weak;
    const auto gwcc = largest_group(weak_label, n_weak, result.nodes);
    std::vector<bool> in_gwcc(n);
    for (std::uint32_t v = 0; v < n; ++v) in_gwcc[v] = weak_label[v] == gwcc;

    std::uint32_t n_scc = 0;
    const auto scc = strongly_connected(succ, n_scc);
    const auto gscc = largest_group(scc, n_scc, result.nodes, &in_gwcc);

    std::vector<std::uint32_t> core;
    for (std::uint32_t v = 0; v < n; ++v)
        if (scc[v] == gscc) core.push_back(v);
    std::vector<bool> downstream(n, false), upstream(n, false);
    bfs(succ, core, downstream);
    bfs(pred, core, upstream);

    for (std::uint32_t v = 0; v < n; ++v) {
        NodeClass c = NodeClass::DISCONNECTED;
        if (!in_gwcc[v]) {
            c = NodeClass::DISCONNECTED;
        } else if (scc[v] == gscc) {
            c = NodeClass::GSCC;
        } else if (upstream[v]) {
            c = NodeClass::IN;
        } else if (downstream[v]) {
            c = NodeClass::OUT;
        } else {
            c = NodeClass::TE;
        }
        result.assignment[v] = c;
        ++result.counts[static_cast<std::size_t>(c)];
    }
    return result;
}

TransitionTable transitions(const BowTieResult& from, const BowTieResult& to, std::string from_label,
                            std::string to_label) {
    TransitionTable table;
    table.from_period = std::move(from_label);
    table.to_period = std::move(to_label);
    std::unordered_map<std::string_view, NodeClass> later;
    for (std::size_t i = 0; i < to.nodes.size(); ++i) later.emplace(to.nodes[i], to.assignment[i]);
    std::size_t common = 0;
    for (std::size_t i = 0; i < from.nodes.size(); ++i) {
        auto it = later.find(from.nodes[i]);
        if (it == later.end()) {
            ++table.exited;
            ++table.exited_by_class[static_cast<std::size_t>(from.assignment[i])];
            continue;
        }
        ++common;
        ++table.counts[static_cast<std::size_t>(from.assignment[i])][static_cast<std::size_t>(it->second)];
    }
    table.entered = to.nodes.size() - common;
    std::unordered_map<std::string_view, bool> earlier;
    for (const auto& id : from.nodes) earlier.emplace(id, true);
    for (std::size_t i = 0; i < to.nodes.size(); ++i)
        if (!earlier.contains(to.nodes[i])) ++table.entered_by_class[static_cast<std::size_t>(to.assignment[i])];
    return table;
}

void write_assignment_csv(std::ostream& out, const BowTieResult& result) {
    out << "user_id,class\n";
    for (std::size_t i = 0; i < result.nodes.size(); ++i)
        csv::write_row(out, {result.nodes[i], std::string(to_string(result.assignment[i]))});
}

void write_transition_csv(std::ostream& out, const TransitionTable& table) {
    out << "from\\to";
    for (auto c : kAllClasses) out << ',' << to_string(c);
    out << ",exited\n";
    for (auto r : kAllClasses) {
        const auto ri = static_cast<std::size_t>(r);
        out << to_string(r);
        for (auto c : kAllClasses) out << ',' << table.counts[ri][static_cast<std::size_t>(c)];
        out << ',' << table.exited_by_class[ri] << '\n';
    }
    out << "entered";
    for (auto c : kAllClasses) out << ',' << table.entered_by_class[static_cast<std::size_t>(c)];
    out << ",0\n";
}

std::string summary_json(const BowTieResult& result) {
    nlohmann::ordered_json j;
    j["GWCC"] = result.gwcc_size();
    for (auto c : kAllClasses) j[std::string(to_string(c))] = result.count(c);
    j["weak_components"] = result.n_weak_components;
    return j.dump(2);
}

}  // namespace txflow::bowtie
