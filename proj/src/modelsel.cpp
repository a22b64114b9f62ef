#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "txflow/csv.hpp"
#include "txflow/error.hpp"
#include "txflow/modelsel.hpp"

namespace txflow::modelsel {

namespace {

constexpr double kSmooth = 1e-12;

void require_pairs(const nmf::NmfModel& model, const char* metric) {
    if (model.K < 2) throw std::invalid_argument(std::string(metric) + " coherence needs K >= 2");
}

double kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) sum += p(i) * std::log((p(i) + kSmooth) / (q(i) + kSmooth));
    return sum;
}

Eigen::VectorXd l1_normalized(const Eigen::VectorXd& v, const char* what) {
    const double total = v.sum();
    if (!(total > 0.0)) throw std::invalid_argument(std::string("Arun coherence: zero ") + what + " vector");
    return v / total;
}

Eigen::VectorXd sorted_descending(Eigen::VectorXd v) {
    std::sort(v.data(), v.data() + v.size(), std::greater<>());
    return v;
}

}  // namespace

double coherence_cao(const nmf::NmfModel& model) {
    require_pairs(model, "CaoJuan2009");
    const auto n = nmf::normalize(model);
    const auto K = n.D.rows();
    double sum = 0.0;
    std::size_t pairs = 0;
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index l = k + 1; l < K; ++l) {
            sum += n.D.row(k).dot(n.D.row(l)) / (n.D.row(k).norm() * n.D.row(l).norm());
            ++pairs;
        }
    return sum / static_cast<double>(pairs);
}

double coherence_arun(const Eigen::MatrixXd& X, const nmf::NmfModel& model) {
    if (X.rows() != model.S.rows() || X.cols() != model.D.cols())
        throw std::invalid_argument("Arun coherence: matrix shape does not match the model");
    const auto n = nmf::normalize(model);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(n.D);
    const Eigen::VectorXd p = sorted_descending(l1_normalized(svd.singularValues(), "singular value"));
    const Eigen::VectorXd lengths = X.rowwise().sum();
    const Eigen::VectorXd q = sorted_descending(l1_normalized(n.S.transpose() * lengths, "length-weighted"));
    return kl(p, q) + kl(q, p);
}

double coherence_deveaud(const nmf::NmfModel& model) {
    require_pairs(model, "Deveaud2014");
    const auto n = nmf::normalize(model);
    const auto K = n.D.rows();
    double sum = 0.0;
    std::size_t pairs = 0;
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index l = k + 1; l < K; ++l) {
            const Eigen::VectorXd p = n.D.row(k).transpose().array() + kSmooth;
            const Eigen::VectorXd q = n.D.row(l).transpose().array() + kSmooth;
            const Eigen::VectorXd ps = p / p.sum(), qs = q / q.sum();
            const Eigen::VectorXd m = 0.5 * (ps + qs);
            double js = 0.0;
            for (Eigen::Index i = 0; i < m.size(); ++i)
                js += 0.5 * ps(i) * std::log(ps(i) / m(i)) + 0.5 * qs(i) * std::log(qs(i) / m(i));
            sum += js;
            ++pairs;
        }
    return sum / static_cast<double>(pairs);
}

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::CaoJuan2009: return "CaoJuan2009";
        case Metric::Arun2010: return "Arun2010";
        case Metric::Deveaud2014: return "Deveaud2014";
    }
    return "?";
}

Metric parse_metric(std::string_view name) {
    for (auto m : {Metric::CaoJuan2009, Metric::Arun2010, Metric::Deveaud2014})
        if (to_string(m) == name) return m;
    throw std::invalid_argument("unknown coherence metric '" + std::string(name) + "'");
}

const MetricSummary& CoherenceReport::summary(Metric metric) const {
    for (const auto& m : metrics)
        if (m.metric == metric) return m;
    throw std::out_of_range("metric not in report");
}

CoherenceReport select_k(const Eigen::MatrixXd& X, const SelectKOptions& options) {
    if (options.k_values.empty()) throw std::invalid_argument("K range is empty");
    if (options.runs_per_k == 0) throw std::invalid_argument("runs per K must be >= 1");
    if (options.metrics.empty()) throw std::invalid_argument("no coherence metric selected");

    CoherenceReport report;
    report.k_values = options.k_values;
    std::sort(report.k_values.begin(), report.k_values.end());
    report.k_values.erase(std::unique(report.k_values.begin(), report.k_values.end()), report.k_values.end());
    report.runs_per_k = options.runs_per_k;
    const auto limit = static_cast<std::size_t>(std::min(X.rows(), X.cols()));
    for (auto k : report.k_values)
        if (k == 0 || k > limit)
            throw std::invalid_argument("K = " + std::to_string(k) + " outside [1, " + std::to_string(limit) + "]");

    std::vector<std::uint64_t> seeds = options.seeds;
    if (seeds.empty()) seeds.push_back(0);
    while (seeds.size() < options.runs_per_k) seeds.push_back(seeds.back() + 1);

    const std::size_t nk = report.k_values.size(), nm = options.metrics.size(), runs = options.runs_per_k;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    // scores[(ki * runs + run) * nm + m]
    std::vector<double> scores(nk * runs * nm, nan);
    std::vector<std::string> fit_error(nk * runs);

    const auto tasks = static_cast<std::int64_t>(nk * runs);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t t = 0; t < tasks; ++t) {
        const auto ki = static_cast<std::size_t>(t) / runs, run = static_cast<std::size_t>(t) % runs;
        try {
            const auto model = nmf::nmf_fit(X, report.k_values[ki], seeds[run], options.nmf);
            nmf::normalize(model);  // vanished components count as a failed fit
            for (std::size_t m = 0; m < nm; ++m) {
                double v = nan;
                try {
                    switch (options.metrics[m]) {
                        case Metric::CaoJuan2009: v = coherence_cao(model); break;
                        case Metric::Arun2010: v = coherence_arun(X, model); break;
                        case Metric::Deveaud2014: v = -coherence_deveaud(model); break;
                    }
                } catch (const std::invalid_argument&) {
                    v = nan;  // metric undefined for this K
                }
                scores[static_cast<std::size_t>(t) * nm + m] = v;
            }
        } catch (const std::exception& e) {
            fit_error[static_cast<std::size_t>(t)] = e.what();
        }
    }

    for (std::size_t ki = 0; ki < nk; ++ki) {
        std::size_t ok = 0;
        for (std::size_t run = 0; run < runs; ++run) {
            const auto& err = fit_error[ki * runs + run];
            if (err.empty()) {
                ++ok;
            } else {
                report.failures.push_back("K=" + std::to_string(report.k_values[ki]) + " seed=" +
                                          std::to_string(seeds[run]) + ": " + err);
            }
        }
        if (ok == 0)
            throw NumericError("every NMF run failed for K = " + std::to_string(report.k_values[ki]), 0.0);
    }

    for (std::size_t m = 0; m < nm; ++m) {
        MetricSummary s;
        s.metric = options.metrics[m];
        s.mean.assign(nk, nan);
        s.se.assign(nk, nan);
        s.scaled.assign(nk, nan);
        s.runs_ok.assign(nk, 0);
        for (std::size_t ki = 0; ki < nk; ++ki) {
            std::vector<double> vals;
            for (std::size_t run = 0; run < runs; ++run) {
                const double v = scores[(ki * runs + run) * nm + m];
                if (std::isfinite(v)) vals.push_back(v);
            }
            s.runs_ok[ki] = vals.size();
            if (vals.empty()) continue;
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            s.mean[ki] = mean;
            s.se[ki] = vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1) /
                                                   static_cast<double>(vals.size()))
                                       : 0.0;
        }
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (double v : s.mean)
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        if (std::isfinite(lo)) {
            s.constant = hi == lo;
            for (std::size_t ki = 0; ki < nk; ++ki)
                if (std::isfinite(s.mean[ki])) s.scaled[ki] = s.constant ? 0.0 : (s.mean[ki] - lo) / (hi - lo);
            std::size_t best = nk;
            for (std::size_t ki = 0; ki < nk; ++ki)
                if (std::isfinite(s.scaled[ki]) && (best == nk || s.scaled[ki] < s.scaled[best])) best = ki;
            s.chosen_k = report.k_values[best];
        }
        report.metrics.push_back(std::move(s));
    }

    report.consensus_k = report.metrics.front().chosen_k;
    for (const auto& s : report.metrics)
        if (s.metric == Metric::Arun2010 && s.chosen_k != 0) report.consensus_k = s.chosen_k;
    if (report.consensus_k == 0) {
        // only metrics undefined at the candidate K (e.g. K = 1 for pairwise ones)
        report.consensus_k = report.k_values.front();
    }
    return report;
}

void write_report_csv(std::ostream& out, const CoherenceReport& report) {
    out << "metric,k,mean,se,scaled,lower,upper\n";
    auto num = [](double v) { return std::isfinite(v) ? csv::format_double(v) : std::string(); };
    for (const auto& s : report.metrics)
        for (std::size_t ki = 0; ki < report.k_values.size(); ++ki)
            csv::write_row(out, {std::string(to_string(s.metric)), std::to_string(report.k_values[ki]), num(s.mean[ki]),
                                 num(s.se[ki]), num(s.scaled[ki]), num(s.mean[ki] - kBandZ * s.se[ki]),
                                 num(s.mean[ki] + kBandZ * s.se[ki])});
}

std::string report_json(const CoherenceReport& report) {
    nlohmann::ordered_json j;
    j["k_values"] = report.k_values;
    j["runs_per_k"] = report.runs_per_k;
    nlohmann::ordered_json chosen = nlohmann::ordered_json::object();
    for (const auto& s : report.metrics) {
        chosen[std::string(to_string(s.metric))] = s.chosen_k;
        if (s.constant) j["constant_metrics"].push_back(std::string(to_string(s.metric)));
    }
    j["chosen_k"] = chosen;
    j["consensus_k"] = report.consensus_k;
    j["failures"] = report.failures;
    return j.dump(2);
}

}  // namespace txflow::modelsel
