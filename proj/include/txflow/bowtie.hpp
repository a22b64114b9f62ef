#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "txflow/netbuild.hpp"

namespace txflow::bowtie {

enum class NodeClass : std::uint8_t { GSCC = 0, IN = 1, OUT = 2, TE = 3, DISCONNECTED = 4 };
inline constexpr std::size_t kClassCount = 5;
inline constexpr std::array<NodeClass, kClassCount> kAllClasses{NodeClass::GSCC, NodeClass::IN, NodeClass::OUT,
                                                                NodeClass::TE, NodeClass::DISCONNECTED};

std::string_view to_string(NodeClass c);
NodeClass parse_node_class(std::string_view name);

/// Partition of a snapshot: GWCC = GSCC + IN + OUT + TE, everything else is
/// DISCONNECTED.
struct BowTieResult {
    std::vector<std::string> nodes;     // same order as the network
    std::vector<NodeClass> assignment;  // parallel to nodes
    std::array<std::size_t, kClassCount> counts{};
    std::size_t n_weak_components = 0;

    std::size_t count(NodeClass c) const { return counts[static_cast<std::size_t>(c)]; }
    std::size_t gwcc_size() const {
        return count(NodeClass::GSCC) + count(NodeClass::IN) + count(NodeClass::OUT) + count(NodeClass::TE);
    }
    /// Throws std::out_of_range for an unknown user.
    NodeClass class_of(std::string_view user) const;
};

/// GWCC is the largest weakly connected component; GSCC the largest strongly
/// connected component inside it. Size ties go to the component holding the
/// smallest user id. Depends only on which edges exist, not their weights.
/// Throws std::invalid_argument if the network contains self-loops.
BowTieResult bowtie_decompose(const netbuild::FlowNetwork& network);

struct TransitionTable {
    std::string from_period;
    std::string to_period;
    std::array<std::array<std::size_t, kClassCount>, kClassCount> counts{};  // [from][to]
    std::size_t entered = 0;  // only in `to`
    std::size_t exited = 0;   // only in `from`
    std::array<std::size_t, kClassCount> entered_by_class{};  // class in `to`
    std::array<std::size_t, kClassCount> exited_by_class{};   // class in `from`
};

TransitionTable transitions(const BowTieResult& from, const BowTieResult& to, std::string from_label = {},
                            std::string to_label = {});

/// `user_id,class`
void write_assignment_csv(std::ostream& out, const BowTieResult& result);
/// Rows are `from` classes plus a final `entered` row; columns are `to`
/// classes plus a final `exited` column.
void write_transition_csv(std::ostream& out, const TransitionTable& table);
/// {"GWCC":..,"GSCC":..,"IN":..,"OUT":..,"TE":..,"DISCONNECTED":..,"weak_components":..}
std::string summary_json(const BowTieResult& result);

}  // namespace txflow::bowtie
