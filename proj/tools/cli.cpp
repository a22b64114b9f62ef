#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "txflow/bowtie.hpp"
#include "txflow/csv.hpp"
#include "txflow/error.hpp"
#include "txflow/hodge.hpp"
#include "txflow/ingest.hpp"
#include "txflow/kernels.hpp"
#include "txflow/modelsel.hpp"
#include "txflow/netbuild.hpp"
#include "txflow/nmf.hpp"
#include "txflow/synth.hpp"

namespace txflow::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Options {
    std::string input;
    std::vector<std::string> inputs;
    std::string clustering;
    std::string labels;
    std::string out = ".";
    std::string from, to;
    std::string scale = "month";
    std::string weight = "frequency";
    std::size_t k = 13;
    std::string k_range = "2..20";
    std::size_t runs = 20;
    std::uint64_t seed = 0;
    int threads = 0;
    bool strict = false;
    bool all_users = false;
    bool regular = false;
    bool drop_self_loops = false;
    bool dense = false;
    bool profiles = false;
    std::size_t bins = 20;
    long max_iter = 2000;
    double tol = 1e-7;
    std::size_t dense_limit = netbuild::kDefaultDenseLimit;
    // synth
    std::string kind = "lda";
    std::size_t docs = 100, vocab = 100, topics = 5, doc_length = 2000;
    double alpha = 0.1, beta = 0.1;
    std::size_t months = 2;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

void write_text(const fs::path& path, const std::string& text) { open_out(path) << text << '\n'; }

std::vector<std::size_t> parse_k_range(const std::string& text) {
    auto number = [&](std::string_view s) {
        std::size_t v = 0;
        s = csv::trim(s);
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v == 0)
            throw UsageError("invalid --k-range '" + text + "'");
        return v;
    };
    std::vector<std::size_t> ks;
    for (const char* sep : {"..", ":", "-"}) {
        auto pos = text.find(sep);
        if (pos == std::string::npos) continue;
        const auto lo = number(std::string_view(text).substr(0, pos));
        const auto hi = number(std::string_view(text).substr(pos + std::string_view(sep).size()));
        if (hi < lo) throw UsageError("invalid --k-range '" + text + "'");
        for (auto k = lo; k <= hi; ++k) ks.push_back(k);
        return ks;
    }
    for (auto piece : csv::split(text, ',')) ks.push_back(number(piece));
    return ks;
}

ingest::UserClustering obtain_clustering(const Options& o, const std::vector<ingest::TransferRecord>& records) {
    if (!o.clustering.empty()) return ingest::read_clustering_csv(o.clustering);
    return ingest::cluster_addresses(records);
}

std::vector<ingest::TransferRecord> load_records(const Options& o, std::ostream& err) {
    auto set = ingest::read_records(o.input, {o.strict, ingest::EpochBounds::defaults()});
    for (const auto& e : set.errors)
        err << "warning: skipped line " << e.line << " (tx '" << e.tx_id << "'): " << e.message << '\n';
    return std::move(set.records);
}

netbuild::FlowNetwork without_self_loops(const netbuild::FlowNetwork& net) {
    std::set<netbuild::UserId> all(net.nodes().begin(), net.nodes().end());
    return netbuild::restrict(net, all, true);
}

/// A snapshot directory becomes its adjacency matrix; a file is read as a
/// labelled matrix CSV.
LabeledMatrix load_matrix(const Options& o) {
    const fs::path path = o.input;
    if (fs::is_directory(path)) {
        const auto net = without_self_loops(netbuild::read_snapshot(path));
        return netbuild::export_adjacency(net, netbuild::parse_weight(o.weight), o.dense_limit);
    }
    return read_matrix_csv(path);
}

// ---------------------------------------------------------------------------

int cmd_cluster(const Options& o, std::ostream& out, std::ostream& err) {
    auto set = ingest::read_records(o.input, {o.strict, ingest::EpochBounds::defaults()});
    for (const auto& e : set.errors)
        err << "warning: skipped line " << e.line << " (tx '" << e.tx_id << "'): " << e.message << '\n';
    const auto clustering = ingest::cluster_addresses(set.records);
    const fs::path dir = o.out;
    {
        auto f = open_out(dir / "clustering.csv");
        ingest::write_clustering_csv(f, clustering);
    }
    {
        auto f = open_out(dir / "rank_size.csv");
        f << "rank,size\n";
        for (const auto& rs : ingest::rank_size(clustering)) f << rs.rank << ',' << rs.size << '\n';
    }
    ordered_json summary;
    summary["records"] = set.records.size();
    summary["record_errors"] = set.errors.size();
    summary["addresses"] = clustering.address_count();
    summary["users"] = clustering.users().size();
    summary["type_a_users"] = clustering.type_a_count();
    summary["type_b_users"] = clustering.type_b_count();
    if (!o.labels.empty()) {
        const auto labels = ingest::load_labels(o.labels, clustering);
        for (const auto& w : labels.warnings) err << "warning: label " << w << '\n';
        auto f = open_out(dir / "labels.csv");
        f << "user_id,name,category,country,size\n";
        for (const auto& [uid, label] : labels.labels)
            csv::write_row(f, {uid, label.name, std::string(ingest::to_string(label.category)),
                               label.country.value_or(""), std::to_string(clustering.user(uid)->size)});
        summary["labels"] = labels.labels.size();
        summary["unresolved_labels"] = labels.unresolved;
    }
    out << summary.dump(2) << '\n';
    return kOk;
}

int cmd_aggregate(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.from.empty() || o.to.empty()) throw UsageError("aggregate needs --from and --to");
    const auto scale = parse_time_scale(o.scale);
    const auto periods = periods_between(o.from, o.to, scale);
    const auto records = load_records(o, err);
    const auto clustering = obtain_clustering(o, records);
    const auto resolved = netbuild::resolve_transfers(records, clustering);
    for (const auto& r : resolved.rejected) err << "warning: rejected tx '" << r.tx_id << "': " << r.reason << '\n';

    ordered_json summary = ordered_json::array();
    for (const auto& period : periods) {
        auto net = netbuild::aggregate(resolved.transfers, period, scale);
        if (o.regular) net = netbuild::restrict(net, netbuild::select_regular_users(resolved.transfers, period), true);
        if (o.drop_self_loops) net = without_self_loops(net);
        const fs::path dir = fs::path(o.out) / period.label();
        netbuild::write_snapshot(dir, net);
        if (o.dense) {
            write_matrix_csv(dir / "adjacency.csv",
                             netbuild::export_adjacency(net, netbuild::parse_weight(o.weight), o.dense_limit));
        }
        if (o.profiles) {
            auto f = open_out(dir / "activity.csv");
            f << "user_id,hour,out,in,self,total,peak_hour\n";
            for (const auto& p : netbuild::activity_profiles(resolved.transfers, net.nodes()))
                for (int h = 0; h < 24; ++h)
                    f << csv::quote(p.user) << ',' << h << ',' << p.out[h] << ',' << p.in[h] << ',' << p.self[h] << ','
                      << p.total[h] << ',' << p.peak_hour << '\n';
        }
        if (net.node_count() == 0) err << "warning: period " << period.label() << " has an empty network\n";
        ordered_json row;
        row["period"] = period.label();
        row["nodes"] = net.node_count();
        row["edges"] = net.edge_count();
        row["self_loops"] = net.self_loop_count();
        summary.push_back(row);
    }
    out << summary.dump(2) << '\n';
    return kOk;
}

void write_bowtie(const fs::path& dir, const bowtie::BowTieResult& result) {
    auto f = open_out(dir / "bowtie.csv");
    bowtie::write_assignment_csv(f, result);
    write_text(dir / "bowtie_summary.json", bowtie::summary_json(result));
}

int cmd_bowtie(const Options& o, std::ostream& out, std::ostream&) {
    std::vector<std::string> inputs = o.inputs;
    if (!o.input.empty()) inputs.insert(inputs.begin(), o.input);
    if (inputs.empty()) throw UsageError("bowtie needs --input <snapshot dir>");
    std::vector<std::pair<std::string, bowtie::BowTieResult>> results;
    for (const auto& in : inputs) {
        const auto net = without_self_loops(netbuild::read_snapshot(in));
        auto result = bowtie::bowtie_decompose(net);
        const std::string label = net.period().empty() ? fs::path(in).filename().string() : net.period().label();
        write_bowtie(fs::path(o.out) / label, result);
        out << label << ": " << bowtie::summary_json(result) << '\n';
        results.emplace_back(label, std::move(result));
    }
    for (std::size_t i = 1; i < results.size(); ++i) {
        const auto table = bowtie::transitions(results[i - 1].second, results[i].second, results[i - 1].first,
                                               results[i].first);
        auto f = open_out(fs::path(o.out) / ("transitions_" + results[i - 1].first + "_" + results[i].first + ".csv"));
        bowtie::write_transition_csv(f, table);
    }
    return kOk;
}

void write_hodge(const fs::path& dir, const hodge::HodgeResult& result, const bowtie::BowTieResult& classes,
                 std::size_t bins) {
    {
        auto f = open_out(dir / "potential.csv");
        hodge::write_potential_csv(f, result, &classes);
    }
    {
        auto f = open_out(dir / "gradient.csv");
        hodge::write_flow_csv(f, result, false);
    }
    {
        auto f = open_out(dir / "circular.csv");
        hodge::write_flow_csv(f, result, true);
    }
    {
        auto f = open_out(dir / "potential_hist.csv");
        hodge::write_histogram_csv(f, hodge::potential_distribution(result, classes, bins));
    }
    ordered_json j;
    j["components"] = result.n_components;
    j["residual_norm"] = csv::round12(result.residual_norm);
    write_text(dir / "hodge_summary.json", j.dump(2));
}

int cmd_hodge(const Options& o, std::ostream& out, std::ostream&) {
    if (o.input.empty()) throw UsageError("hodge needs --input <snapshot dir>");
    const auto net = without_self_loops(netbuild::read_snapshot(o.input));
    const auto graph = hodge::net_flow(net, netbuild::parse_weight(o.weight));
    const auto result = hodge::hodge_decompose(graph);
    const auto classes = bowtie::bowtie_decompose(net);
    write_hodge(o.out, result, classes, o.bins);
    out << "components " << result.n_components << ", max |div F_circ| " << csv::format_double(result.residual_norm)
        << '\n';
    return kOk;
}

void write_nmf(const fs::path& dir, const nmf::NmfModel& model) {
    {
        auto f = open_out(dir / "sources.csv");
        nmf::write_sources_csv(f, model);
    }
    {
        auto f = open_out(dir / "destinations.csv");
        nmf::write_destinations_csv(f, model);
    }
    {
        auto f = open_out(dir / "components.csv");
        f << "k,r,ihh_src,ihh_dest,role,rank,user_id,weight\n";
        for (const auto& c : nmf::summarize(model, 10)) {
            auto emit = [&](const char* role, const std::vector<nmf::WeightedUser>& list) {
                for (std::size_t i = 0; i < list.size(); ++i)
                    csv::write_row(f, {std::to_string(c.k + 1), csv::format_double(c.r), csv::format_double(c.ihh_src),
                                       csv::format_double(c.ihh_dest), role, std::to_string(i + 1), list[i].user,
                                       csv::format_double(list[i].weight)});
            };
            emit("destination", c.top_destinations);
            emit("source", c.top_sources);
        }
    }
    write_text(dir / "nmf_summary.json", nmf::summary_json(model));
}

nmf::NmfOptions nmf_options(const Options& o) {
    nmf::NmfOptions opt;
    opt.max_iter = o.max_iter;
    opt.tol = o.tol;
    return opt;
}

int cmd_nmf(const Options& o, std::ostream& out, std::ostream&) {
    if (o.input.empty()) throw UsageError("nmf needs --input <snapshot dir | matrix csv>");
    const auto X = load_matrix(o);
    const auto limit = static_cast<std::size_t>(std::min(X.values.rows(), X.values.cols()));
    if (o.k == 0 || o.k > limit)
        throw UsageError("--k " + std::to_string(o.k) + " outside [1, " + std::to_string(limit) + "]");
    const auto model = nmf::nmf_fit(X, o.k, o.seed, nmf_options(o));
    write_nmf(o.out, model);
    out << nmf::summary_json(model) << '\n';
    return kOk;
}

int cmd_select_k(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.input.empty()) throw UsageError("select-k needs --input <snapshot dir | matrix csv>");
    const auto X = load_matrix(o);
    modelsel::SelectKOptions opt;
    opt.k_values = parse_k_range(o.k_range);
    const auto limit = static_cast<std::size_t>(std::min(X.values.rows(), X.values.cols()));
    for (auto k : opt.k_values)
        if (k > limit) throw UsageError("K = " + std::to_string(k) + " exceeds the matrix dimension " + std::to_string(limit));
    opt.runs_per_k = o.runs;
    opt.seeds = {o.seed};
    opt.nmf = nmf_options(o);
    const auto report = modelsel::select_k(X.values, opt);
    for (const auto& f : report.failures) err << "warning: excluded fit " << f << '\n';
    {
        auto f = open_out(fs::path(o.out) / "coherence.csv");
        modelsel::write_report_csv(f, report);
    }
    write_text(fs::path(o.out) / "select_k.json", modelsel::report_json(report));
    out << modelsel::report_json(report) << '\n';
    return kOk;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream&) {
    const fs::path dir = o.out;
    if (o.kind == "lda") {
        fs::create_directories(dir);
        const auto corpus = modelsel::generate_lda({o.docs, o.vocab, o.topics, o.alpha, o.beta, o.doc_length, o.seed});
        write_matrix_csv(dir / "counts.csv", corpus.as_matrix());
        LabeledMatrix theta{corpus.as_matrix().row_ids, {}, corpus.theta};
        LabeledMatrix phi{{}, corpus.as_matrix().col_ids, corpus.phi};
        for (std::size_t k = 0; k < o.topics; ++k) {
            theta.col_ids.push_back("k" + std::to_string(k + 1));
            phi.row_ids.push_back("k" + std::to_string(k + 1));
        }
        write_matrix_csv(dir / "theta.csv", theta);
        write_matrix_csv(dir / "phi.csv", phi);
        out << "wrote " << o.docs << "x" << o.vocab << " corpus with " << o.topics << " topics to " << dir.string()
            << '\n';
        return kOk;
    }
    if (o.kind == "records") {
        synth::RecordFixtureParams p;
        p.seed = o.seed;
        p.months = o.months;
        if (!o.from.empty()) {
            const auto start = parse_period(o.from, TimeScale::Month);
            std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(start.start)};
            p.year = static_cast<int>(ymd.year());
            p.first_month = static_cast<unsigned>(ymd.month());
        }
        const auto records = synth::generate_records(p);
        auto f = open_out(dir / "records.csv");
        ingest::write_records_csv(f, records);
        out << "wrote " << records.size() << " records to " << (dir / "records.csv").string() << '\n';
        return kOk;
    }
    throw UsageError("unknown --kind '" + o.kind + "' (lda|records)");
}

int exit_code_of(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) return kUsageError;
    if (dynamic_cast<const NumericError*>(&e)) return kNumericError;
    return kDataError;
}

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.from.empty() || o.to.empty()) throw UsageError("analyze needs --from and --to");
    const auto scale = parse_time_scale(o.scale);
    const auto periods = periods_between(o.from, o.to, scale);
    const auto weight = netbuild::parse_weight(o.weight);
    const auto records = load_records(o, err);
    const auto clustering = obtain_clustering(o, records);
    const auto resolved = netbuild::resolve_transfers(records, clustering);
    for (const auto& r : resolved.rejected) err << "warning: rejected tx '" << r.tx_id << "': " << r.reason << '\n';

    const fs::path root = o.out;
    auto summary = open_out(root / "summary.csv");
    summary << "period,nodes,edges,self_loops,common_nodes,common_edges,gwcc,gscc,in,out,te\n";

    int status = kOk;
    std::optional<netbuild::FlowNetwork> prev_net;
    std::optional<std::pair<std::string, bowtie::BowTieResult>> prev_bowtie;
    std::optional<std::pair<std::string, nmf::NmfModel>> prev_model;
    for (const auto& period : periods) {
        const auto label = period.label();
        const fs::path dir = root / label;
        try {
            auto net = netbuild::aggregate(resolved.transfers, period, scale);
            if (!o.all_users)
                net = netbuild::restrict(net, netbuild::select_regular_users(resolved.transfers, period), false);
            netbuild::write_snapshot(dir, net);
            netbuild::Overlap ov;
            if (prev_net) ov = netbuild::overlap(*prev_net, net);
            const auto core = without_self_loops(net);
            const auto bt = bowtie::bowtie_decompose(core);
            summary << label << ',' << net.node_count() << ',' << net.edge_count() << ',' << net.self_loop_count()
                    << ',' << (prev_net ? std::to_string(ov.common_nodes) : "") << ','
                    << (prev_net ? std::to_string(ov.common_edges) : "") << ',' << bt.gwcc_size() << ','
                    << bt.count(bowtie::NodeClass::GSCC) << ',' << bt.count(bowtie::NodeClass::IN) << ','
                    << bt.count(bowtie::NodeClass::OUT) << ',' << bt.count(bowtie::NodeClass::TE) << '\n';
            prev_net = net;
            if (core.edge_count() == 0) {
                err << "warning: period " << label << " has an empty network; bundle left empty\n";
                prev_bowtie.reset();
                prev_model.reset();
                continue;
            }
            write_bowtie(dir, bt);
            if (prev_bowtie) {
                auto f = open_out(root / ("transitions_" + prev_bowtie->first + "_" + label + ".csv"));
                bowtie::write_transition_csv(f, bowtie::transitions(prev_bowtie->second, bt, prev_bowtie->first, label));
            }
            prev_bowtie = {label, bt};

            const auto hres = hodge::hodge_decompose(hodge::net_flow(core, weight));
            write_hodge(dir, hres, bt, o.bins);

            const auto X = netbuild::export_adjacency(core, weight, o.dense_limit);
            const auto model = nmf::nmf_fit(X, o.k, o.seed, nmf_options(o));
            write_nmf(dir, model);
            if (prev_model) {
                for (auto basis : {nmf::Basis::D, nmf::Basis::S}) {
                    const auto sim = nmf::cosine_similarity_matrix(prev_model->second, model, basis);
                    LabeledMatrix m;
                    for (Eigen::Index k = 0; k < sim.rows(); ++k) m.row_ids.push_back("k" + std::to_string(k + 1));
                    for (Eigen::Index k = 0; k < sim.cols(); ++k) m.col_ids.push_back("k" + std::to_string(k + 1));
                    m.values = sim;
                    write_matrix_csv(root / ("similarity_" + std::string(basis == nmf::Basis::D ? "D" : "S") + "_" +
                                             prev_model->first + "_" + label + ".csv"),
                                     m);
                }
            }
            prev_model = {label, model};
        } catch (const std::exception& e) {
            err << "error: period " << label << ": " << e.what() << '\n';
            status = std::max(status, exit_code_of(e));
            prev_bowtie.reset();
            prev_model.reset();
        }
    }
    out << "analyzed " << periods.size() << " period(s) into " << root.string() << '\n';
    return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"txflow: user-level transaction flow networks"};
    app.set_config("--config", "", "key=value configuration file; flags override it");
    app.require_subcommand(1);
    Options o;
    auto* threads = app.add_option("--threads", o.threads, "cap on worker threads");
    (void)threads;

    auto common_input = [&](CLI::App* cmd, const char* what) {
        cmd->add_option("--input", o.input, what)->required();
        cmd->add_option("--out", o.out, "output directory");
    };
    auto period_flags = [&](CLI::App* cmd) {
        cmd->add_option("--from", o.from, "first period, e.g. 2019-01");
        cmd->add_option("--to", o.to, "last period, inclusive");
        cmd->add_option("--scale", o.scale, "day|month|year");
    };
    auto nmf_flags = [&](CLI::App* cmd) {
        cmd->add_option("--seed", o.seed, "random seed");
        cmd->add_option("--max-iter", o.max_iter, "NMF iteration cap");
        cmd->add_option("--tol", o.tol, "NMF relative objective tolerance");
    };

    auto* cluster = app.add_subcommand("cluster", "cluster addresses into users");
    common_input(cluster, "transfer records (CSV or JSON lines)");
    cluster->add_flag("--strict", o.strict, "fail on the first malformed record");
    cluster->add_option("--labels", o.labels, "identity label CSV");

    auto* aggregate = app.add_subcommand("aggregate", "build per-period flow snapshots");
    common_input(aggregate, "transfer records");
    period_flags(aggregate);
    aggregate->add_option("--clustering", o.clustering, "clustering.csv from `cluster`");
    aggregate->add_option("--weight", o.weight, "frequency|amount (dense export)");
    aggregate->add_flag("--strict", o.strict);
    aggregate->add_flag("--regular", o.regular, "keep regular users only and drop self-loops");
    aggregate->add_flag("--drop-self-loops", o.drop_self_loops);
    aggregate->add_flag("--dense", o.dense, "also write adjacency.csv");
    aggregate->add_flag("--profiles", o.profiles, "also write hourly activity profiles");
    aggregate->add_option("--dense-limit", o.dense_limit);

    auto* bow = app.add_subcommand("bowtie", "bow-tie decomposition of snapshots");
    bow->add_option("--input", o.inputs, "snapshot directories, in time order")->required();
    bow->add_option("--out", o.out, "output directory");

    auto* hod = app.add_subcommand("hodge", "Hodge potentials and flow decomposition");
    common_input(hod, "snapshot directory");
    hod->add_option("--weight", o.weight, "frequency|amount");
    hod->add_option("--bins", o.bins, "histogram bins");

    auto* nm = app.add_subcommand("nmf", "KL-NMF of a snapshot or matrix");
    common_input(nm, "snapshot directory or matrix CSV");
    nm->add_option("--k", o.k, "number of components");
    nm->add_option("--weight", o.weight, "frequency|amount");
    nm->add_option("--dense-limit", o.dense_limit);
    nmf_flags(nm);

    auto* sel = app.add_subcommand("select-k", "choose K by coherence measures");
    common_input(sel, "snapshot directory or matrix CSV");
    sel->add_option("--k-range", o.k_range, "e.g. 2..20 or 3,5,8");
    sel->add_option("--runs", o.runs, "runs per K");
    sel->add_option("--weight", o.weight, "frequency|amount");
    sel->add_option("--dense-limit", o.dense_limit);
    nmf_flags(sel);

    auto* ana = app.add_subcommand("analyze", "full per-period pipeline");
    common_input(ana, "transfer records");
    period_flags(ana);
    ana->add_option("--clustering", o.clustering, "clustering.csv from `cluster`");
    ana->add_option("--weight", o.weight, "frequency|amount");
    ana->add_option("--k", o.k, "NMF components");
    ana->add_option("--bins", o.bins, "histogram bins");
    ana->add_option("--dense-limit", o.dense_limit);
    ana->add_flag("--strict", o.strict);
    ana->add_flag("--all-users", o.all_users, "skip the regular-user filter");
    nmf_flags(ana);

    auto* syn = app.add_subcommand("synth", "generate synthetic data");
    syn->add_option("--kind", o.kind, "lda|records");
    syn->add_option("--out", o.out, "output directory");
    syn->add_option("--seed", o.seed);
    syn->add_option("--docs", o.docs);
    syn->add_option("--vocab", o.vocab);
    syn->add_option("--k", o.topics, "number of topics");
    syn->add_option("--alpha", o.alpha);
    syn->add_option("--beta", o.beta);
    syn->add_option("--doc-length", o.doc_length);
    syn->add_option("--from", o.from, "first month of records");
    syn->add_option("--months", o.months);

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    }

    kernels::set_thread_count(o.threads);
    try {
        if (*cluster) return cmd_cluster(o, out, err);
        if (*aggregate) return cmd_aggregate(o, out, err);
        if (*bow) return cmd_bowtie(o, out, err);
        if (*hod) return cmd_hodge(o, out, err);
        if (*nm) return cmd_nmf(o, out, err);
        if (*sel) return cmd_select_k(o, out, err);
        if (*ana) return cmd_analyze(o, out, err);
        if (*syn) return cmd_synth(o, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_of(e);
    }
    return kUsageError;
}

}  // namespace txflow::cli
