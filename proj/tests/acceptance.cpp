// Acceptance harness: one PASS/FAIL line per criterion. Pass criterion
// numbers as arguments to run a subset.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "oracles.hpp"
#include "txflow/bowtie.hpp"
#include "txflow/hodge.hpp"
#include "txflow/ingest.hpp"
#include "txflow/modelsel.hpp"
#include "txflow/netbuild.hpp"
#include "txflow/nmf.hpp"

using namespace txflow;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits, fixed here for every criterion.
constexpr double kDivergenceTol = 1e-9;     // max |div F_circ| relative to max |F|
constexpr double kPinvTol = 1e-8;           // phi vs pseudoinverse on small graphs
constexpr double kMeanTol = 1e-12;          // mean(phi) per component
constexpr double kMonotoneTol = 1e-12;      // allowed KL increase per step, relative
constexpr double kRankOneKl = 1e-8;
constexpr double kIdentityTol = 1e-12;
constexpr double kPoissonTol = 1e-9;
constexpr double kCosineTol = 1e-12;
constexpr double kRecoveryRate = 0.8;
constexpr double kLdaAlpha = 0.1;  // symmetric priors of the K-recovery corpora
constexpr double kLdaBeta = 0.1;

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<Outcome()> body;
};

ingest::TransferRecord make_tx(std::string id, std::vector<std::string> in, std::vector<std::string> out) {
    ingest::TransferRecord r;
    r.tx_id = std::move(id);
    r.inputs = std::move(in);
    for (auto& a : out) r.outputs.push_back({a, Amount::parse("0.1")});
    r.timestamp = parse_timestamp("2019-09-01T00:00:00Z");
    return r;
}

Outcome clustering_fixture() {
    Outcome o;
    const auto c = ingest::cluster_addresses(
        std::vector{make_tx("TX1", {"a1", "a2"}, {"a123", "a1"}), make_tx("TX2", {"a1", "a3"}, {"a45", "a3"})});
    std::map<std::string, std::set<std::string>> groups;
    for (const auto& [addr, uid] : c.assignments()) groups[uid].insert(addr);
    o.require(c.type_a_count() == 1 && c.type_b_count() == 2, "user counts by type");
    o.require(groups.size() == 3, "three users");
    const auto* a = c.user_of("a1");
    o.require(a && groups[*a] == std::set<std::string>{"a1", "a2", "a3"}, "TypeA members");
    o.require(a && c.user(*a)->type == ingest::UserType::TypeA, "TypeA type");
    for (const char* b : {"a123", "a45"}) {
        const auto* u = c.user_of(b);
        o.require(u && groups[*u] == std::set<std::string>{b} && c.user(*u)->type == ingest::UserType::TypeB,
                  std::string("TypeB ") + b);
    }
    return o;
}

Outcome aggregation_fixture() {
    Outcome o;
    auto t = [](const char* s, const char* d, const char* amount) {
        return netbuild::UserTransfer{s, d, Amount::parse(amount), parse_timestamp("2019-09-10T12:00:00Z")};
    };
    const std::vector<netbuild::UserTransfer> fig3{t("i", "j", "0.1"), t("i", "j", "0.2"), t("i", "j", "0.4"),
                                                   t("j", "i", "0.1"), t("i", "i", "1"),   t("i", "i", "2")};
    const auto net = netbuild::aggregate(fig3, Period::month(2019, 9), TimeScale::Month);
    auto check = [&](const char* s, const char* d, std::int64_t f, const char* g) {
        const auto* e = net.edge(s, d);
        o.require(e && e->frequency == f && e->amount == Amount::parse(g), std::string(s) + "->" + d);
    };
    check("i", "j", 3, "0.7");
    check("j", "i", 1, "0.1");
    check("i", "i", 2, "3");
    o.require(net.edge_count() == 3, "edge count");
    return o;
}

Outcome bowtie_oracle() {
    Outcome o;
    std::mt19937_64 rng(20190901);
    std::uniform_int_distribution<std::size_t> size(1, 50);
    std::uniform_real_distribution<double> prob(0.05, 0.3);
    int agree = 0;
    for (int t = 0; t < 100; ++t) {
        const auto g = oracle::random_digraph(rng, size(rng), prob(rng));
        agree += bowtie::bowtie_decompose(oracle::to_network(g)).assignment == oracle::bowtie_classes(g.n, g.edges);
    }
    o.require(agree == 100, std::to_string(agree) + "/100 agree");
    o.detail = o.ok ? "100/100 agree" : o.detail;
    return o;
}

Outcome hodge_identities() {
    Outcome o;
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<std::size_t> size(2, 100);
    std::uniform_real_distribution<double> degree(0.5, 6.0);
    double worst_div = 0, worst_pinv = 0, worst_mean = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = t < 30 ? 2 + static_cast<std::size_t>(t) % 19 : size(rng);
        const double p = std::min(1.0, degree(rng) / static_cast<double>(n));
        const auto g = oracle::random_digraph(rng, n, p, 20);
        const auto nf = hodge::net_flow(oracle::to_network(g), netbuild::Weight::Frequency);
        const auto r = hodge::hodge_decompose(nf);

        double fmax = 0;
        Eigen::VectorXd div = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (const auto& q : r.pairs) {
            fmax = std::max(fmax, std::abs(q.net));
            o.require(q.net == q.gradient + q.circular || std::abs(q.net - q.gradient - q.circular) <= 1e-15 * fmax,
                      "F = F_grad + F_circ");
            div(q.i) += q.circular;
            div(q.j) -= q.circular;
        }
        if (fmax > 0) worst_div = std::max(worst_div, div.cwiseAbs().maxCoeff() / fmax);

        // connected components of the support
        std::vector<std::size_t> parent(n);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
            return parent[x] == x ? x : parent[x] = find(parent[x]);
        };
        for (const auto& q : r.pairs) parent[find(q.i)] = find(q.j);
        std::map<std::size_t, double> sums;
        for (std::size_t i = 0; i < n; ++i) sums[find(i)] += r.phi(static_cast<Eigen::Index>(i));
        for (const auto& [root, s] : sums) worst_mean = std::max(worst_mean, std::abs(s));

        if (n <= 20) {
            const Eigen::VectorXd expect = oracle::pinv_potential(nf.dense_net(), nf.dense_weight());
            worst_pinv = std::max(worst_pinv, (r.phi - expect).cwiseAbs().maxCoeff());
        }
    }
    o.require(worst_div <= kDivergenceTol, "divergence " + std::to_string(worst_div));
    o.require(worst_pinv <= kPinvTol, "pinv gap " + std::to_string(worst_pinv));
    o.require(worst_mean <= kMeanTol, "component mean " + std::to_string(worst_mean));
    std::ostringstream d;
    d << "max div " << worst_div << ", pinv " << worst_pinv << ", mean " << worst_mean;
    if (o.ok) o.detail = d.str();
    return o;
}

Outcome nmf_correctness() {
    Outcome o;
    std::mt19937_64 rng(777);
    std::uniform_int_distribution<Eigen::Index> dim(10, 200);
    std::uniform_int_distribution<std::size_t> rank(2, 15);
    std::uniform_real_distribution<double> zeros(0.0, 0.8);
    double worst_rise = 0, worst_id = 0, worst_gap = 0;
    for (int t = 0; t < 20; ++t) {
        const Eigen::Index rows = dim(rng), cols = dim(rng);
        const std::size_t K = std::min<std::size_t>(rank(rng), static_cast<std::size_t>(std::min(rows, cols)));
        Eigen::MatrixXd X = oracle::random_counts(rng, rows, cols, zeros(rng));
        X(0, 0) += 1;
        const auto m = nmf::nmf_fit(X, K, static_cast<std::uint64_t>(t));
        for (std::size_t i = 1; i < m.objective_trace.size(); ++i) {
            const double prev = m.objective_trace[i - 1];
            worst_rise = std::max(worst_rise, (m.objective_trace[i] - prev) / std::max(1.0, prev));
        }
        const auto n = nmf::normalize(m);
        const Eigen::MatrixXd model = m.S * m.D;
        const Eigen::MatrixXd rebuilt = model.sum() * (n.S * n.r.asDiagonal() * n.D);
        worst_id = std::max({worst_id, (n.S.colwise().sum().array() - 1.0).abs().maxCoeff(),
                             (n.D.rowwise().sum().array() - 1.0).abs().maxCoeff(), std::abs(n.r.sum() - 1.0),
                             (rebuilt - model).cwiseAbs().maxCoeff() / model.cwiseAbs().maxCoeff()});
        const double gap = nmf::poisson_loglik_gap(X, m);
        worst_gap = std::max(worst_gap, std::abs(gap - m.kl_final) / m.kl_final);
    }
    Eigen::VectorXd u(5), v(6);
    u << 1, 2, 3, 4, 5;
    v << 2, 1, 0.5, 3, 1, 4;
    const auto r1 = nmf::nmf_fit(Eigen::MatrixXd(u * v.transpose()), 1, 0);

    o.require(worst_rise <= kMonotoneTol, "objective rose by " + std::to_string(worst_rise));
    o.require(r1.kl_final <= kRankOneKl, "rank-1 KL " + std::to_string(r1.kl_final));
    o.require(worst_id <= kIdentityTol, "normalization identity gap " + std::to_string(worst_id));
    o.require(worst_gap <= kPoissonTol, "Poisson gap " + std::to_string(worst_gap));
    std::ostringstream d;
    d << "max rise " << worst_rise << ", rank-1 KL " << r1.kl_final << ", identities " << worst_id << ", Poisson "
      << worst_gap;
    if (o.ok) o.detail = d.str();
    return o;
}

Outcome ihh_checks() {
    Outcome o;
    for (std::size_t N : {1, 2, 3, 5, 7, 10, 13, 64, 100, 999, 1000}) {
        const std::vector<double> uniform(N, 1.0 / static_cast<double>(N));
        o.require(nmf::ihh(uniform) == static_cast<double>(N), "uniform N=" + std::to_string(N));
        std::vector<double> hot(N, 0.0);
        hot[N / 2] = 1.0;
        o.require(nmf::ihh(hot) == 1.0, "one-hot N=" + std::to_string(N));
    }
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::size_t> len(1, 200);
    std::exponential_distribution<double> e;
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> v(len(rng));
        for (auto& x : v) x = e(rng);
        const double s = std::accumulate(v.begin(), v.end(), 0.0);
        for (auto& x : v) x /= s;
        const double h = nmf::ihh(v);
        o.require(h >= 1.0 - 1e-12 && h <= static_cast<double>(v.size()) * (1 + 1e-12), "bounds");
    }
    return o;
}

Outcome k_recovery() {
    Outcome o;
    const int reps = 20;
    int hits = 0;
    std::ostringstream picks;
    for (int rep = 0; rep < reps; ++rep) {
        const auto corpus = modelsel::generate_lda(
            {100, 100, 5, kLdaAlpha, kLdaBeta, 2000, static_cast<std::uint64_t>(1000 + rep)});
        modelsel::SelectKOptions opt;
        for (std::size_t k = 2; k <= 10; ++k) opt.k_values.push_back(k);
        opt.runs_per_k = 10;
        opt.seeds = {static_cast<std::uint64_t>(rep) * 100};
        opt.metrics = {modelsel::Metric::Arun2010};
        const auto report = modelsel::select_k(corpus.counts.cast<double>(), opt);
        const auto k = report.consensus_k;
        hits += k >= 4 && k <= 6;
        picks << (rep ? " " : "") << k;
        std::cerr << "  rep " << rep << ": K = " << k << '\n';
    }
    const double rate = static_cast<double>(hits) / reps;
    o.require(rate >= kRecoveryRate, std::to_string(hits) + "/20 within +-1 (" + picks.str() + ")");
    if (o.ok) o.detail = std::to_string(hits) + "/20 within +-1 (" + picks.str() + ")";
    return o;
}

Outcome stability() {
    Outcome o;
    std::mt19937_64 rng(8);
    const auto X = oracle::random_counts(rng, 40, 30, 0.3);
    const auto a = nmf::nmf_fit(X, 5, 3);
    const Eigen::Index K = 5;
    const std::array<Eigen::Index, 5> perm{3, 0, 4, 1, 2};
    auto b = a;
    for (Eigen::Index k = 0; k < K; ++k) {
        b.S.col(k) = a.S.col(perm[k]);
        b.D.row(k) = a.D.row(perm[k]);
    }
    for (auto basis : {nmf::Basis::D, nmf::Basis::S}) {
        const auto self = nmf::cosine_similarity_matrix(a, a, basis);
        for (Eigen::Index k = 0; k < K; ++k) o.require(std::abs(self(k, k) - 1.0) <= kCosineTol, "unit diagonal");
        const auto sim = nmf::cosine_similarity_matrix(a, b, basis);
        for (Eigen::Index k = 0; k < K; ++k)
            for (Eigen::Index j = 0; j < K; ++j)
                o.require(perm[j] == k ? std::abs(sim(k, j) - 1.0) <= kCosineTol : sim(k, j) < 1.0,
                          "permutation structure");
    }
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "txflow_acceptance_determinism";
    fs::remove_all(root);
    const std::string input = std::string(TXFLOW_TEST_DATA) + "/two_month_records.csv";
    for (const char* run : {"a", "b"}) {
        std::ostringstream out, err;
        const int code = cli::run({"txflow", "analyze", "--input", input, "--out", (root / run).string(), "--from",
                                   "2019-01", "--to", "2019-02", "--seed", "11"},
                                  out, err);
        o.require(code == 0, "analyze exit " + std::to_string(code) + ": " + err.str());
    }
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto twin = root / "b" / fs::relative(e.path(), root / "a");
        o.require(slurp(e.path()) == slurp(twin), "differs: " + fs::relative(e.path(), root / "a").string());
    }
    o.require(files > 0, "no output");
    fs::remove_all(root);
    if (o.ok) o.detail = std::to_string(files) + " files identical";
    return o;
}

Outcome scale_smoke() {
    Outcome o;
    const std::size_t n = 500, edges = 17000;
    std::mt19937_64 rng(17215);
    std::uniform_int_distribution<std::size_t> node(0, n - 1);
    std::geometric_distribution<int> extra(0.5);
    std::uniform_int_distribution<long> second(0, 30L * 86400 - 1);
    std::set<std::pair<std::size_t, std::size_t>> chosen;
    while (chosen.size() < edges) {
        const auto s = node(rng), d = node(rng);
        if (s != d) chosen.insert({s, d});
    }
    const auto start = Period::month(2019, 9).start;
    std::vector<netbuild::UserTransfer> transfers;
    for (const auto& [s, d] : chosen)
        for (int f = 1 + extra(rng); f > 0; --f)
            transfers.push_back({oracle::node_name(s), oracle::node_name(d),
                                 Amount::from_satoshi(1000 + static_cast<std::int64_t>(rng() % 100000)),
                                 start + std::chrono::seconds(second(rng))});

    const auto net = netbuild::aggregate(transfers, Period::month(2019, 9), TimeScale::Month);
    std::set<netbuild::UserId> all(net.nodes().begin(), net.nodes().end());
    const auto core = netbuild::restrict(net, all, true);
    const auto bt = bowtie::bowtie_decompose(core);
    const auto hd = hodge::hodge_decompose(hodge::net_flow(core, netbuild::Weight::Frequency));
    const auto X = netbuild::export_adjacency(core, netbuild::Weight::Frequency);
    const auto m = nmf::nmf_fit(X, 13, 1);
    o.require(core.node_count() == n && core.edge_count() == edges, "snapshot size");
    o.require(bt.gwcc_size() == n, "GWCC");
    o.require(hd.residual_norm <= kDivergenceTol * 20, "Hodge residual");
    o.require(m.K == 13 && std::isfinite(m.kl_final), "NMF fit");
    std::ostringstream d;
    d << core.node_count() << " nodes, " << core.edge_count() << " edges, GSCC " << bt.count(bowtie::NodeClass::GSCC)
      << ", NMF " << m.iterations << " iterations";
    if (o.ok) o.detail = d.str();
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "clustering fixture", 1, clustering_fixture},
        {2, "aggregation fixture", 1, aggregation_fixture},
        {3, "bow-tie oracle equivalence", 10, bowtie_oracle},
        {4, "Hodge identities", 30, hodge_identities},
        {5, "NMF correctness", 60, nmf_correctness},
        {6, "IHH", 1, ihh_checks},
        {7, "K-recovery", 600, k_recovery},
        {8, "stability machinery", 1, stability},
        {9, "determinism", 30, determinism},
        {10, "scale smoke test", 60, scale_smoke},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.limit_s;
        const bool pass = o.ok && in_time;
        failures += !pass;
        std::printf("%s %2d  %-28s %8.2f s (limit %g s)%s%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                    c.limit_s, o.detail.empty() ? "" : "  ", o.detail.c_str());
        if (!in_time) std::printf("          time limit exceeded\n");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
