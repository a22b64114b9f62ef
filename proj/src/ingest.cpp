#include "txflow/ingest.hpp"

#include <algorithm>
#include <fstream>

#include "txflow/csv.hpp"
#include "txflow/error.hpp"

namespace txflow::ingest {

namespace chr = std::chrono;

EpochBounds EpochBounds::defaults() {
    return {chr::sys_days{chr::year{2009} / 1 / 3}, chr::sys_days{chr::year{2100} / 1 / 1}};
}

void validate(const TransferRecord& record, const EpochBounds& bounds) {
    auto fail = [&](const std::string& why) {
        return DataError("record '" + record.tx_id + "': " + why);
    };
    if (record.inputs.empty()) throw fail("no input addresses");
    if (record.outputs.empty()) throw fail("no outputs");
    for (const auto& in : record.inputs)
        if (in.empty()) throw fail("empty input address");
    for (const auto& out : record.outputs) {
        if (out.address.empty()) throw fail("empty output address");
        if (out.amount < Amount{}) throw fail("negative amount");
    }
    if (record.timestamp < bounds.earliest || record.timestamp >= bounds.latest)
        throw fail("timestamp " + format_timestamp(record.timestamp) + " outside epoch bounds");
}

std::string_view to_string(UserType type) { return type == UserType::TypeA ? "A" : "B"; }

namespace {

std::string padded_rank(std::size_t rank, std::size_t total) {
    std::string digits = std::to_string(rank);
    const std::size_t width = std::max<std::size_t>(10, std::to_string(total).size());
    digits.insert(0, width - digits.size(), '0');
    return digits;
}

}  // namespace

UserClustering UserClustering::from_groups(std::vector<Group> groups) {
    for (auto& g : groups) std::sort(g.members.begin(), g.members.end());
    std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
        const bool a_multi = a.members.size() >= 2, b_multi = b.members.size() >= 2;
        if (a_multi != b_multi) return a_multi;
        if (a_multi && a.members.size() != b.members.size()) return a.members.size() > b.members.size();
        return a.members.front() < b.members.front();
    });
    const auto n_multi = static_cast<std::size_t>(
        std::count_if(groups.begin(), groups.end(), [](const Group& g) { return g.members.size() >= 2; }));

    UserClustering out;
    out.type_a_count_ = n_multi;
    out.users_.reserve(groups.size());
    for (std::size_t u = 0; u < groups.size(); ++u) {
        const auto& g = groups[u];
        UserInfo info;
        info.size = static_cast<std::uint32_t>(g.members.size());
        if (u < n_multi) {
            info.id = padded_rank(u, n_multi);
            info.type = UserType::TypeA;
        } else {
            info.id = g.members.front();
            info.type = UserType::TypeB;
        }
        const auto slot = static_cast<std::uint32_t>(u);
        if (!out.user_index_.emplace(info.id, slot).second)
            throw DataError("user id collision for '" + info.id + "'");
        for (const auto& m : g.members) out.address_user_.emplace(m, slot);
        out.users_.push_back(std::move(info));
    }
    return out;
}

const std::string* UserClustering::user_of(std::string_view address) const {
    auto it = address_user_.find(std::string(address));
    return it == address_user_.end() ? nullptr : &users_[it->second].id;
}

std::optional<UserInfo> UserClustering::user(std::string_view user_id) const {
    auto it = user_index_.find(std::string(user_id));
    if (it == user_index_.end()) return std::nullopt;
    return users_[it->second];
}

std::vector<std::pair<std::string, std::string>> UserClustering::assignments() const {
    std::vector<std::pair<std::string, std::string>> rows;
    rows.reserve(address_user_.size());
    for (const auto& [addr, slot] : address_user_) rows.emplace_back(addr, users_[slot].id);
    std::sort(rows.begin(), rows.end());
    return rows;
}

UserClustering UserClustering::from_assignments(std::span<const std::pair<std::string, std::string>> rows) {
    std::unordered_map<std::string, std::size_t> group_of;
    std::unordered_map<std::string, std::string> seen;
    std::vector<UserClustering::Group> groups;
    std::vector<std::string> ids;
    for (const auto& [addr, uid] : rows) {
        auto [it, fresh] = seen.emplace(addr, uid);
        if (!fresh) {
            if (it->second != uid) throw DataError("address '" + addr + "' assigned to two users");
            continue;
        }
        auto [git, gfresh] = group_of.emplace(uid, groups.size());
        if (gfresh) {
            groups.emplace_back();
            ids.push_back(uid);
        }
        groups[git->second].members.push_back(addr);
    }
    auto rebuilt = from_groups(groups);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto* got = rebuilt.user_of(groups[g].members.front());
        if (*got != ids[g])
            throw DataError("user id '" + ids[g] + "' does not follow the ranking convention (expected '" +
                            *got + "')");
    }
    return rebuilt;
}

std::uint32_t ClusterBuilder::intern(const std::string& address) {
    auto [it, fresh] = index_.emplace(address, 0);
    if (fresh) {
        it->second = sets_.add();
        addresses_.push_back(address);
    }
    return it->second;
}

void ClusterBuilder::add(const TransferRecord& record) {
    const std::uint32_t first = intern(record.inputs.at(0));
    for (std::size_t i = 1; i < record.inputs.size(); ++i) sets_.unite(first, intern(record.inputs[i]));
    for (const auto& out : record.outputs) intern(out.address);
}

UserClustering ClusterBuilder::finish() {
    std::unordered_map<std::uint32_t, std::size_t> group_of_root;
    std::vector<UserClustering::Group> groups;
    for (std::uint32_t a = 0; a < addresses_.size(); ++a) {
        auto [it, fresh] = group_of_root.emplace(sets_.find(a), groups.size());
        if (fresh) groups.emplace_back();
        groups[it->second].members.push_back(addresses_[a]);
    }
    return UserClustering::from_groups(std::move(groups));
}

UserClustering cluster_addresses(std::span<const TransferRecord> records) {
    ClusterBuilder builder;
    for (const auto& r : records) builder.add(r);
    return builder.finish();
}

std::vector<RankSize> rank_size(const UserClustering& clustering) {
    std::vector<RankSize> out;
    out.reserve(clustering.type_a_count());
    for (std::size_t u = 0; u < clustering.type_a_count(); ++u)
        out.push_back({u + 1, clustering.users()[u].size});
    return out;
}

// ---------------------------------------------------------------------------

LabelCategory parse_label_category(std::string_view name) {
    if (name == "Exchange") return LabelCategory::Exchange;
    if (name == "Service") return LabelCategory::Service;
    if (name == "Gambling") return LabelCategory::Gambling;
    if (name == "Pool") return LabelCategory::Pool;
    if (name == "Historic") return LabelCategory::Historic;
    if (name == "Other") return LabelCategory::Other;
    throw DataError("unknown label category '" + std::string(name) + "'");
}

std::string_view to_string(LabelCategory category) {
    switch (category) {
        case LabelCategory::Exchange: return "Exchange";
        case LabelCategory::Service: return "Service";
        case LabelCategory::Gambling: return "Gambling";
        case LabelCategory::Pool: return "Pool";
        case LabelCategory::Historic: return "Historic";
        case LabelCategory::Other: return "Other";
    }
    return "Other";
}

LabelSet parse_labels(std::istream& in, const UserClustering& clustering) {
    LabelSet result;
    std::map<std::string, std::size_t> first_line;
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (csv::trim(line).empty()) continue;
        auto fields = csv::split_line(line);
        if (header) {
            header = false;
            if (fields.size() < 3 || csv::trim(fields[0]) != "user_id")
                throw DataError("label file: expected header user_id,name,category,country");
            continue;
        }
        if (fields.size() < 3 || fields.size() > 4)
            throw DataError("label file line " + std::to_string(lineno) + ": expected 3 or 4 fields");
        IdentityLabel label;
        label.user_id = std::string(csv::trim(fields[0]));
        label.name = std::string(csv::trim(fields[1]));
        label.category = parse_label_category(csv::trim(fields[2]));
        if (fields.size() == 4 && !csv::trim(fields[3]).empty()) label.country = std::string(csv::trim(fields[3]));

        auto [it, fresh] = first_line.emplace(label.user_id, lineno);
        if (!fresh)
            throw DataError("label file line " + std::to_string(lineno) + ": duplicate user_id '" + label.user_id +
                            "' (first on line " + std::to_string(it->second) + ")");
        if (!clustering.has_user(label.user_id)) {
            ++result.unresolved;
            result.warnings.push_back("line " + std::to_string(lineno) + ": unknown user '" + label.user_id + "'");
            continue;
        }
        result.labels.emplace(label.user_id, std::move(label));
    }
    return result;
}

LabelSet load_labels(const std::filesystem::path& path, const UserClustering& clustering) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read label file " + path.string());
    return parse_labels(in, clustering);
}

// ---------------------------------------------------------------------------

void write_clustering_csv(std::ostream& out, const UserClustering& clustering) {
    out << "address,user_id,user_type\n";
    for (const auto& [addr, uid] : clustering.assignments()) {
        const auto info = clustering.user(uid);
        csv::write_row(out, {addr, uid, std::string(to_string(info->type))});
    }
}

UserClustering read_clustering_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read clustering file " + path.string());
    std::vector<std::pair<std::string, std::string>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (csv::trim(line).empty()) continue;
        auto fields = csv::split_line(line);
        if (lineno == 1 && !fields.empty() && fields[0] == "address") continue;
        if (fields.size() < 2)
            throw DataError(path.string() + " line " + std::to_string(lineno) + ": expected address,user_id");
        rows.emplace_back(fields[0], fields[1]);
    }
    return UserClustering::from_assignments(rows);
}

}  // namespace txflow::ingest
