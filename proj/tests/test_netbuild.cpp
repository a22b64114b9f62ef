#include <doctest.h>

#include <filesystem>
#include <map>
#include <random>

#include "oracles.hpp"
#include "txflow/error.hpp"
#include "txflow/netbuild.hpp"

using namespace txflow;
using namespace txflow::netbuild;

namespace {

UserTransfer tr(std::string s, std::string d, const char* amount, const char* when = "2019-09-10T12:00:00Z") {
    return {std::move(s), std::move(d), Amount::parse(amount), parse_timestamp(when)};
}

// Fig 3: i->j 0.1, 0.2, 0.4; j->i 0.1; i->i 1, 2
std::vector<UserTransfer> fig3() {
    return {tr("i", "j", "0.1"), tr("i", "j", "0.2"), tr("i", "j", "0.4"),
            tr("j", "i", "0.1"), tr("i", "i", "1"),   tr("i", "i", "2")};
}

const Period kSep = Period::month(2019, 9);

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("txflow_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_SUITE("netbuild") {

TEST_CASE("resolve transfers per output") {
    ingest::TransferRecord r;
    r.tx_id = "T";
    r.inputs = {"u1", "u2"};
    r.outputs = {{"v1", Amount::parse("0.7")}, {"u1", Amount::parse("0.3")}};
    r.timestamp = parse_timestamp("2019-09-01T05:00:00Z");
    ingest::TransferRecord w = r;
    w.tx_id = "W";
    w.inputs = {"u2", "w1"};
    const auto clustering = ingest::UserClustering::from_assignments(std::vector<std::pair<std::string, std::string>>{
        {"u1", "0000000000"}, {"u2", "0000000000"}, {"v1", "v1"}, {"w1", "w1"}});

    const auto ok = resolve_transfers(std::vector{r}, clustering);
    REQUIRE(ok.transfers.size() == 2);
    CHECK(ok.transfers[0].source == "0000000000");
    CHECK(ok.transfers[0].destination == "v1");
    CHECK(ok.transfers[0].amount == Amount::parse("0.7"));
    CHECK(ok.transfers[1].is_self_loop());
    CHECK(ok.transfers[1].timestamp == r.timestamp);

    const auto mixed = resolve_transfers(std::vector{w}, clustering);
    CHECK(mixed.transfers.empty());
    REQUIRE(mixed.rejected.size() == 1);
    CHECK(mixed.rejected[0].tx_id == "W");

    ingest::TransferRecord stranger = r;
    stranger.outputs = {{"nowhere", Amount::parse("1")}};
    try {
        resolve_transfers(std::vector{stranger}, clustering);
        FAIL("unknown address accepted");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("nowhere") != std::string::npos);
    }
}

TEST_CASE("resolved amounts are conserved") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> addr(0, 59), sat(0, 1'000'000);
    std::vector<ingest::TransferRecord> recs;
    Amount total;
    for (int t = 0; t < 1000; ++t) {
        ingest::TransferRecord r;
        r.tx_id = std::to_string(t);
        r.inputs = {"a" + std::to_string(addr(rng))};
        for (int k = 0; k < 3; ++k) {
            const auto a = Amount::from_satoshi(sat(rng));
            r.outputs.push_back({"a" + std::to_string(addr(rng)), a});
            total += a;
        }
        r.timestamp = parse_timestamp("2019-09-01T00:00:00Z");
        recs.push_back(r);
    }
    const auto c = ingest::cluster_addresses(recs);
    const auto res = resolve_transfers(recs, c);
    CHECK(res.rejected.empty());
    Amount sum;
    for (const auto& t : res.transfers) sum += t.amount;
    CHECK(sum == total);
}

TEST_CASE("Fig 3 aggregation") {
    const auto net = aggregate(fig3(), kSep, TimeScale::Month);
    CHECK(net.nodes() == std::vector<UserId>{"i", "j"});
    CHECK(net.edge("i", "j")->frequency == 3);
    CHECK(net.edge("i", "j")->amount == Amount::parse("0.7"));
    CHECK(net.edge("j", "i")->frequency == 1);
    CHECK(net.edge("j", "i")->amount == Amount::parse("0.1"));
    CHECK(net.edge("i", "i")->frequency == 2);
    CHECK(net.edge("i", "i")->amount == Amount::parse("3"));
    CHECK(net.edge("j", "j") == nullptr);
    CHECK(net.self_loop_count() == 1);
    CHECK_FALSE(net.self_loops_removed());
    CHECK(net.total_amount() == Amount::parse("3.8"));

    const auto r = restrict(net, {"i", "j"}, true);
    CHECK(r.edge_count() == 2);
    CHECK(r.self_loops_removed());
    CHECK(r.edge("i", "i") == nullptr);
    CHECK(r.edge("i", "j")->amount == Amount::parse("0.7"));

    const auto X = export_adjacency(r, Weight::Frequency);
    CHECK(X.row_ids == std::vector<std::string>{"i", "j"});
    CHECK(X.values(0, 0) == 0);
    CHECK(X.values(0, 1) == 3);
    CHECK(X.values(1, 0) == 1);
    CHECK(X.values(1, 1) == 0);
    CHECK(export_adjacency(r, Weight::Amount).values(0, 1) == doctest::Approx(0.7));
}

TEST_CASE("aggregation ignores transfers outside the period") {
    std::vector<UserTransfer> ts{tr("a", "b", "1", "2019-08-31T23:59:59Z"), tr("a", "b", "1", "2019-10-01T00:00:00Z")};
    const auto net = aggregate(ts, kSep, TimeScale::Month);
    CHECK(net.node_count() == 0);
    CHECK(net.edge_count() == 0);
    CHECK_THROWS_AS(aggregate(ts, Period::day(std::chrono::sys_days{std::chrono::year{2019} / 9 / 3}), TimeScale::Month),
                    std::invalid_argument);
}

TEST_CASE("aggregation equals group-by oracle") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> user(0, 29), sat(0, 100'000'000), sec(0, 30 * 86400 - 1);
    std::vector<UserTransfer> ts;
    std::map<std::pair<std::string, std::string>, std::pair<std::int64_t, std::int64_t>> expect;
    Amount total;
    for (int t = 0; t < 500; ++t) {
        UserTransfer x{"u" + std::to_string(user(rng)), "u" + std::to_string(user(rng)),
                       Amount::from_satoshi(sat(rng)), kSep.start + std::chrono::seconds(sec(rng))};
        auto& e = expect[{x.source, x.destination}];
        e.first += 1;
        e.second += x.amount.satoshi();
        total += x.amount;
        ts.push_back(x);
    }
    const auto net = aggregate(ts, kSep, TimeScale::Month);
    CHECK(net.edge_count() == expect.size());
    for (const auto& [key, val] : expect) {
        const auto* e = net.edge(key.first, key.second);
        REQUIRE(e != nullptr);
        CHECK(e->frequency == val.first);
        CHECK(e->amount.satoshi() == val.second);
    }
    CHECK(net.total_amount() == total);
    CHECK(std::is_sorted(net.nodes().begin(), net.nodes().end()));
}

TEST_CASE("regular users") {
    const auto p = Period{parse_timestamp("2019-09-01T00:00:00Z"), parse_timestamp("2019-09-04T00:00:00Z")};
    std::vector<UserTransfer> ts{
        tr("a", "b", "1", "2019-09-01T01:00:00Z"), tr("a", "c", "1", "2019-09-02T01:00:00Z"),
        tr("c", "a", "1", "2019-09-03T23:00:00Z"), tr("b", "b", "1", "2019-09-02T01:00:00Z"),
        tr("b", "b", "1", "2019-09-03T01:00:00Z"),
    };
    const auto regular = select_regular_users(ts, p);
    CHECK(regular == std::set<UserId>{"a"});  // b only self-loops after day 1, c misses day 1
}

TEST_CASE("regular users match a day-bitmap oracle") {
    std::mt19937_64 rng(99);
    std::bernoulli_distribution active(0.93);
    std::uniform_int_distribution<int> other(0, 49);
    std::vector<UserTransfer> ts;
    std::vector<std::vector<bool>> seen(50, std::vector<bool>(30, false));
    for (int day = 0; day < 30; ++day)
        for (int u = 0; u < 50; ++u) {
            if (!active(rng)) continue;
            int v = other(rng);
            if (v == u) continue;
            ts.push_back({"u" + std::to_string(u), "u" + std::to_string(v), Amount::from_satoshi(1),
                          kSep.start + std::chrono::days(day) + std::chrono::hours(3)});
            seen[static_cast<std::size_t>(u)][static_cast<std::size_t>(day)] = true;
            seen[static_cast<std::size_t>(v)][static_cast<std::size_t>(day)] = true;
        }
    std::set<UserId> expect;
    for (int u = 0; u < 50; ++u)
        if (std::all_of(seen[static_cast<std::size_t>(u)].begin(), seen[static_cast<std::size_t>(u)].end(),
                        [](bool b) { return b; }))
            expect.insert("u" + std::to_string(u));
    CHECK(select_regular_users(ts, kSep) == expect);
}

TEST_CASE("restrict") {
    const auto net = aggregate(fig3(), kSep, TimeScale::Month);
    const auto none = restrict(net, {}, false);
    CHECK(none.node_count() == 0);
    CHECK(none.edge_count() == 0);

    std::mt19937_64 rng(4);
    const auto g = oracle::random_digraph(rng, 40, 0.1);
    const auto big = oracle::to_network(g);
    std::set<UserId> keep, keep2;
    std::bernoulli_distribution coin(0.6);
    for (const auto& n : big.nodes()) {
        if (coin(rng)) keep.insert(n);
        if (coin(rng)) keep2.insert(n);
    }
    keep.insert("stranger");
    const auto sub = restrict(big, keep, false);
    std::size_t expected_edges = 0;
    for (const auto& [key, flow] : big.edges()) {
        const auto& s = big.nodes()[key.first];
        const auto& d = big.nodes()[key.second];
        const bool in = keep.contains(s) && keep.contains(d);
        expected_edges += in;
        CHECK((sub.edge(s, d) != nullptr) == in);
    }
    CHECK(sub.edge_count() == expected_edges);
    CHECK(sub.node_count() == keep.size() - 1);

    std::set<UserId> both;
    std::set_intersection(keep.begin(), keep.end(), keep2.begin(), keep2.end(), std::inserter(both, both.end()));
    const auto twice = restrict(restrict(big, keep, false), keep2, false);
    const auto once = restrict(big, both, false);
    CHECK(twice.nodes() == once.nodes());
    CHECK(twice.edge_count() == once.edge_count());
}

TEST_CASE("activity profiles") {
    std::vector<UserTransfer> ts{tr("U", "V", "1", "2019-09-02T13:30:00Z")};
    const std::vector<UserId> users{"U", "V", "W"};
    const auto p = activity_profiles(ts, users);
    REQUIRE(p.size() == 3);
    CHECK(p[0].out[13] == 1);
    CHECK(p[0].peak_hour == 13);
    CHECK(p[1].in[13] == 1);
    CHECK(p[1].total[13] == 1);
    CHECK(p[2].peak_hour == 0);
    CHECK(std::all_of(p[2].total.begin(), p[2].total.end(), [](auto v) { return v == 0; }));

    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> u(0, 4), sec(0, 86400 * 5);
    std::vector<UserTransfer> many;
    std::map<std::string, std::array<std::int64_t, 24>> out, in, self;
    for (int t = 0; t < 400; ++t) {
        UserTransfer x{"p" + std::to_string(u(rng)), "p" + std::to_string(u(rng)), Amount::from_satoshi(1),
                       kSep.start + std::chrono::seconds(sec(rng))};
        const int h = utc_hour(x.timestamp);
        if (x.is_self_loop()) {
            ++self[x.source][static_cast<std::size_t>(h)];
        } else {
            ++out[x.source][static_cast<std::size_t>(h)];
            ++in[x.destination][static_cast<std::size_t>(h)];
        }
        many.push_back(x);
    }
    const std::vector<UserId> ps{"p0", "p1", "p2", "p3", "p4"};
    for (const auto& prof : activity_profiles(many, ps)) {
        CHECK(prof.out == out[prof.user]);
        CHECK(prof.in == in[prof.user]);
        CHECK(prof.self == self[prof.user]);
        for (int h = 0; h < 24; ++h) CHECK(prof.total[h] == prof.out[h] + prof.in[h] + prof.self[h]);
        CHECK(prof.total[static_cast<std::size_t>(prof.peak_hour)] == *std::max_element(prof.total.begin(), prof.total.end()));
    }
}

TEST_CASE("adjacency export") {
    const FlowNetwork empty;
    CHECK(export_adjacency(empty, Weight::Frequency).values.size() == 0);

    std::mt19937_64 rng(12);
    const auto g = oracle::random_digraph(rng, 30, 0.08, 9);
    const auto net = oracle::to_network(g);
    const auto X = export_adjacency(net, Weight::Frequency);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(30, 30);
    for (std::size_t e = 0; e < g.edges.size(); ++e)
        expect(g.edges[e].first, g.edges[e].second) = static_cast<double>(g.freq[e]);
    CHECK(X.values == expect);
    CHECK_THROWS_AS(export_adjacency(net, Weight::Frequency, 10), std::invalid_argument);
}

TEST_CASE("overlap is symmetric") {
    std::vector<UserTransfer> a{tr("x", "y", "1"), tr("y", "z", "1")}, b{tr("x", "y", "1"), tr("z", "w", "1")};
    const auto na = aggregate(a, kSep, TimeScale::Month), nb = aggregate(b, kSep, TimeScale::Month);
    const auto ab = overlap(na, nb), ba = overlap(nb, na);
    CHECK(ab.common_nodes == 3);
    CHECK(ab.common_edges == 1);
    CHECK(ba.common_nodes == ab.common_nodes);
    CHECK(ba.common_edges == ab.common_edges);
}

TEST_CASE("snapshot round trip") {
    const auto net = aggregate(fig3(), kSep, TimeScale::Month);
    const auto dir = scratch("snapshot");
    write_snapshot(dir, net);
    const auto back = read_snapshot(dir);
    CHECK(back.period() == net.period());
    CHECK(back.nodes() == net.nodes());
    CHECK(back.edges() == net.edges());
    CHECK(back.self_loops_removed() == net.self_loops_removed());
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(read_snapshot(dir), DataError);
}

TEST_CASE("network invariants are enforced") {
    EdgeMap loops{{{0, 0}, EdgeFlow{1, Amount::from_satoshi(1)}}};
    CHECK_THROWS_AS(FlowNetwork({}, {"a"}, loops, true), std::invalid_argument);
    EdgeMap out_of_range{{{0, 3}, EdgeFlow{1, Amount::from_satoshi(1)}}};
    CHECK_THROWS_AS(FlowNetwork({}, {"a", "b"}, out_of_range, false), std::invalid_argument);
    CHECK_THROWS_AS(FlowNetwork({}, {"a", "a"}, {}, false), std::invalid_argument);
    EdgeMap zero{{{0, 1}, EdgeFlow{0, Amount::from_satoshi(1)}}};
    CHECK_THROWS_AS(FlowNetwork({}, {"a", "b"}, zero, false), std::invalid_argument);
}

}
