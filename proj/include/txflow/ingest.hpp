#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "txflow/amount.hpp"
#include "txflow/disjoint_set.hpp"
#include "txflow/timeutil.hpp"

namespace txflow::ingest {

struct TransferOutput {
    std::string address;
    Amount amount;

    friend bool operator==(const TransferOutput&, const TransferOutput&) = default;
};

/// One transaction: co-spent input addresses and paid outputs.
struct TransferRecord {
    std::string tx_id;
    std::vector<std::string> inputs;
    std::vector<TransferOutput> outputs;
    Timestamp timestamp;

    friend bool operator==(const TransferRecord&, const TransferRecord&) = default;
};

struct EpochBounds {
    Timestamp earliest;
    Timestamp latest;  // exclusive

    /// Genesis block day (2009-01-03) through the end of 2099.
    static EpochBounds defaults();
};

/// Throws DataError naming the tx_id when an invariant is violated.
void validate(const TransferRecord& record, const EpochBounds& bounds = EpochBounds::defaults());

enum class UserType { TypeA, TypeB };

std::string_view to_string(UserType type);

struct UserInfo {
    std::string id;
    UserType type;
    std::uint32_t size;
};

/// Partition of addresses into users. Immutable once built.
///
/// TypeA users (two or more addresses) get zero-padded decimal ids in rank
/// order: descending size, ties broken by the lexicographically smallest
/// member address. A TypeB user's id is its single address.
class UserClustering {
public:
    UserClustering() = default;

    /// Rebuilds a clustering from (address, user_id) rows such as the CSV
    /// export. Verifies the TypeA/TypeB invariants; throws DataError.
    static UserClustering from_assignments(std::span<const std::pair<std::string, std::string>> rows);

    /// nullptr if the address was never seen.
    const std::string* user_of(std::string_view address) const;

    std::optional<UserInfo> user(std::string_view user_id) const;
    bool has_user(std::string_view user_id) const { return user_index_.contains(std::string(user_id)); }

    /// TypeA users in rank order, then TypeB users ordered by id.
    const std::vector<UserInfo>& users() const { return users_; }

    std::size_t address_count() const { return address_user_.size(); }
    std::size_t type_a_count() const { return type_a_count_; }
    std::size_t type_b_count() const { return users_.size() - type_a_count_; }

    /// (address, user_id) sorted by address.
    std::vector<std::pair<std::string, std::string>> assignments() const;

private:
    friend class ClusterBuilder;

    struct Group {
        std::vector<std::string> members;
    };
    static UserClustering from_groups(std::vector<Group> groups);

    std::unordered_map<std::string, std::uint32_t> address_user_;
    std::unordered_map<std::string, std::uint32_t> user_index_;
    std::vector<UserInfo> users_;
    std::size_t type_a_count_ = 0;
};

/// Incremental multi-input clustering: every address that appears in one
/// transaction's input set belongs to the same user. Output-only addresses
/// are registered as singletons.
class ClusterBuilder {
public:
    void add(const TransferRecord& record);
    UserClustering finish();

    std::size_t address_count() const { return addresses_.size(); }

private:
    std::uint32_t intern(const std::string& address);

    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<std::string> addresses_;
    DisjointSet sets_;
};

UserClustering cluster_addresses(std::span<const TransferRecord> records);

struct RankSize {
    std::size_t rank;
    std::uint32_t size;

    friend bool operator==(const RankSize&, const RankSize&) = default;
};

/// TypeA users only, rank 1 is the largest.
std::vector<RankSize> rank_size(const UserClustering& clustering);

// ---------------------------------------------------------------------------
// Identity labels

enum class LabelCategory { Exchange, Service, Gambling, Pool, Historic, Other };

LabelCategory parse_label_category(std::string_view name);
std::string_view to_string(LabelCategory category);

struct IdentityLabel {
    std::string user_id;
    std::string name;
    LabelCategory category;
    std::optional<std::string> country;
};

struct LabelSet {
    std::map<std::string, IdentityLabel> labels;
    std::vector<std::string> warnings;
    std::size_t unresolved = 0;
};

/// CSV with header `user_id,name,category,country`. Labels naming users absent
/// from the clustering are dropped with a warning. A user_id listed twice is a
/// DataError.
LabelSet load_labels(const std::filesystem::path& path, const UserClustering& clustering);
LabelSet parse_labels(std::istream& in, const UserClustering& clustering);

// ---------------------------------------------------------------------------
// Record files

struct RecordError {
    std::size_t line;  // 1-based
    std::string tx_id;
    std::string message;
};

struct RecordReadOptions {
    bool strict = false;  // throw on the first malformed record
    EpochBounds bounds = EpochBounds::defaults();
};

struct RecordSet {
    std::vector<TransferRecord> records;
    std::vector<RecordError> errors;
};

/// Line-delimited JSON or CSV (`tx_id,timestamp,inputs,outputs`, inputs
/// `;`-separated, outputs `;`-separated `address:amount`). The format is
/// detected from the first non-blank character.
RecordSet read_records(const std::filesystem::path& path, const RecordReadOptions& options = {});
RecordSet parse_records(std::istream& in, const RecordReadOptions& options = {});

void write_records_csv(std::ostream& out, std::span<const TransferRecord> records);

/// `address,user_id,user_type`
void write_clustering_csv(std::ostream& out, const UserClustering& clustering);
UserClustering read_clustering_csv(const std::filesystem::path& path);

}  // namespace txflow::ingest
