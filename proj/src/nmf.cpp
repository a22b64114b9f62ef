#include "txflow/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "txflow/csv.hpp"
#include "txflow/error.hpp"
#include "txflow/kernels.hpp"

namespace txflow::nmf {

void nndsvd_init(const Eigen::MatrixXd& X, std::size_t K, std::uint64_t seed, Eigen::MatrixXd& S,
                 Eigen::MatrixXd& D) {
    const auto N = X.rows(), M = X.cols();
    const auto k = static_cast<Eigen::Index>(K);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& U = svd.matrixU();
    const auto& V = svd.matrixV();
    const auto& sigma = svd.singularValues();

    S = Eigen::MatrixXd::Zero(N, k);
    D = Eigen::MatrixXd::Zero(k, M);
    S.col(0) = std::sqrt(sigma(0)) * U.col(0).cwiseAbs();
    D.row(0) = std::sqrt(sigma(0)) * V.col(0).cwiseAbs().transpose();
    for (Eigen::Index j = 1; j < k; ++j) {
        const Eigen::VectorXd x = U.col(j), y = V.col(j);
        const Eigen::VectorXd xp = x.cwiseMax(0.0), xn = (-x).cwiseMax(0.0);
        const Eigen::VectorXd yp = y.cwiseMax(0.0), yn = (-y).cwiseMax(0.0);
        const double xpn = xp.norm(), ypn = yp.norm(), xnn = xn.norm(), ynn = yn.norm();
        const double mp = xpn * ypn, mn = xnn * ynn;
        if (mp == 0.0 && mn == 0.0) continue;
        const bool positive = mp > mn;
        const double scale = std::sqrt(sigma(j) * (positive ? mp : mn));
        S.col(j) = scale * (positive ? xp / xpn : xn / xnn);
        D.row(j) = scale * (positive ? yp / ypn : yn / ynn).transpose();
    }

    // Zeros are fixed points of the multiplicative updates.
    const double avg = X.mean();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    const double tiny = 1e-12 * X.maxCoeff();
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index s = 0; s < N; ++s)
            if (S(s, j) <= tiny) S(s, j) = avg * jitter(rng);
    for (Eigen::Index d = 0; d < M; ++d)
        for (Eigen::Index j = 0; j < k; ++j)
            if (D(j, d) <= tiny) D(j, d) = avg * jitter(rng);
}

namespace {

constexpr double kSparseDensity = 0.85;

std::vector<std::string> index_labels(Eigen::Index n) {
    std::vector<std::string> ids(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = std::to_string(i);
    return ids;
}

void check_input(const Eigen::MatrixXd& X, std::size_t K) {
    if (X.size() == 0) throw std::invalid_argument("NMF input matrix is empty");
    if (K == 0) throw std::invalid_argument("NMF needs K >= 1");
    const auto limit = static_cast<std::size_t>(std::min(X.rows(), X.cols()));
    if (K > limit)
        throw std::invalid_argument("K = " + std::to_string(K) + " exceeds the matrix dimension " + std::to_string(limit));
    if (!X.allFinite()) throw std::invalid_argument("NMF input contains non-finite values");
    if ((X.array() < 0.0).any()) throw std::invalid_argument("NMF input has negative entries");
    if ((X.array() == 0.0).all()) throw std::invalid_argument("NMF input is all zero");
}

/// Sorts components by descending r_k; ties go to the lexicographically
/// larger normalized destination row.
void order_components(NmfModel& m) {
    const Eigen::VectorXd S_total = m.S.colwise().sum().transpose();
    const Eigen::VectorXd D_total = m.D.rowwise().sum();
    const Eigen::VectorXd mass = S_total.cwiseProduct(D_total);
    const double total = mass.sum();
    const auto K = static_cast<Eigen::Index>(m.K);

    std::vector<Eigen::Index> perm(m.K);
    std::iota(perm.begin(), perm.end(), 0);
    auto drow = [&](Eigen::Index k, Eigen::Index d) { return D_total(k) > 0 ? m.D(k, d) / D_total(k) : 0.0; };
    std::stable_sort(perm.begin(), perm.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (mass(a) != mass(b)) return mass(a) > mass(b);
        for (Eigen::Index d = 0; d < m.D.cols(); ++d)
            if (drow(a, d) != drow(b, d)) return drow(a, d) > drow(b, d);
        return false;
    });

    Eigen::MatrixXd S(m.S.rows(), K), D(K, m.D.cols());
    m.r.resize(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        S.col(k) = m.S.col(perm[static_cast<std::size_t>(k)]);
        D.row(k) = m.D.row(perm[static_cast<std::size_t>(k)]);
        m.r(k) = total > 0 ? mass(perm[static_cast<std::size_t>(k)]) / total : 0.0;
    }
    m.S = std::move(S);
    m.D = std::move(D);
}

}  // namespace

NmfModel nmf_fit(const Eigen::MatrixXd& X, std::size_t K, std::uint64_t seed, const NmfOptions& options) {
    return nmf_fit(LabeledMatrix{index_labels(X.rows()), index_labels(X.cols()), X}, K, seed, options);
}

NmfModel nmf_fit(const LabeledMatrix& input, std::size_t K, std::uint64_t seed, const NmfOptions& options) {
    const auto& X = input.values;
    check_input(X, K);

    NmfModel model;
    model.K = K;
    model.seed = seed;
    model.row_ids = input.row_ids;
    model.col_ids = input.col_ids;

    Eigen::MatrixXd S, D;
    nndsvd_init(X, K, seed, S, D);

    // The CSR/CSC kernels win below roughly 85% filled cells.
    const double density = static_cast<double>((X.array() != 0.0).count()) / static_cast<double>(X.size());
    const bool sparse = density < kSparseDensity;
    const kernels::SparseCounts counts = sparse ? kernels::SparseCounts(X) : kernels::SparseCounts(Eigen::MatrixXd());
    kernels::RowMatrix S_rows;
    if (sparse) S_rows = S;

    // Entries that decay below the normal range are zeroed; denormal
    // arithmetic is two orders of magnitude slower and the values are
    // already zero for every practical purpose.
    auto flush = [](auto& M) { M = (M.array() < std::numeric_limits<double>::min()).select(0.0, M); };

    // xi = S D at the current factors is shared between the objective and
    // the next source update.
    std::vector<double> xi_nz;
    Eigen::MatrixXd xi;
    auto objective = [&] {
        if (sparse) {
            kernels::model_at_nonzeros(counts, S_rows, D, xi_nz);
            return kernels::kl_divergence(counts, S_rows, D, xi_nz);
        }
        xi = S * D;
        return kernels::kl_divergence_dense(X, xi);
    };
    double kl = objective();
    model.objective_trace.push_back(kl);
    long it = 0;
    while (it < options.max_iter) {
        if (sparse) {
            kernels::kl_update_sources(counts, S_rows, D, options.eps, xi_nz);
            flush(S_rows);
            kernels::model_at_nonzeros(counts, S_rows, D, xi_nz);
            kernels::kl_update_destinations(counts, S_rows, D, options.eps, xi_nz);
        } else {
            kernels::kl_update_sources_dense(X, S, D, options.eps, xi);
            flush(S);
            kernels::kl_update_destinations_dense(X, S, D, options.eps, S * D);
        }
        flush(D);
        ++it;
        const double next = objective();
        model.objective_trace.push_back(next);
        const double prev = kl;
        kl = next;
        if (prev <= 0.0 || (prev - next) / prev < options.tol) {
            model.converged = true;
            break;
        }
    }
    if (sparse) S = S_rows;
    model.iterations = it;
    model.kl_final = kl;
    model.S = std::move(S);
    model.D = std::move(D);
    order_components(model);
    return model;
}

Normalized normalize(const NmfModel& model) {
    Normalized out;
    out.S_total = model.S.colwise().sum().transpose();
    out.D_total = model.D.rowwise().sum();
    for (std::size_t k = 0; k < model.K; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        if (out.S_total(kk) <= 0.0 || out.D_total(kk) <= 0.0)
            throw NumericError("NMF component " + std::to_string(k + 1) +
                                   " vanished (all-zero factor); refit with a smaller K",
                               0.0);
    }
    out.S = model.S * out.S_total.cwiseInverse().asDiagonal();
    out.D = out.D_total.cwiseInverse().asDiagonal() * model.D;
    const Eigen::VectorXd mass = out.S_total.cwiseProduct(out.D_total);
    out.r = mass / mass.sum();
    return out;
}

Eigen::MatrixXd probability_matrix(const NmfModel& model) {
    const auto n = normalize(model);
    return n.S * n.r.asDiagonal() * n.D;
}

double ihh(std::span<const double> shares) {
    if (shares.empty()) throw std::invalid_argument("IHH of an empty vector");
    double sum = 0.0, peak = 0.0;
    for (double x : shares) {
        if (!(x >= 0.0)) throw std::invalid_argument("IHH shares must be non-negative");
        sum += x;
        peak = std::max(peak, x);
    }
    if (peak == 0.0) throw std::invalid_argument("IHH of a zero vector");
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("IHH shares must sum to 1");
    // (sum y)^2 / sum y^2 with y = x / max x equals 1 / sum x^2 on the simplex,
    // and is exact for uniform and one-hot shares.
    double ys = 0.0, yy = 0.0;
    for (double x : shares) {
        const double y = x / peak;
        ys += y;
        yy += y * y;
    }
    return ys * ys / yy;
}

namespace {

Eigen::Index find_user(const std::vector<std::string>& ids, std::string_view user) {
    auto it = std::find(ids.begin(), ids.end(), user);
    if (it == ids.end()) throw std::out_of_range("user '" + std::string(user) + "' not in the NMF model");
    return static_cast<Eigen::Index>(it - ids.begin());
}

}  // namespace

Eigen::VectorXd expand_user(const NmfModel& model, std::string_view user, Role role) {
    const Eigen::VectorXd S_total = model.S.colwise().sum().transpose();
    const Eigen::VectorXd D_total = model.D.rowwise().sum();
    if (role == Role::Source) {
        const auto s = find_user(model.row_ids, user);
        return model.S.row(s).transpose().cwiseProduct(D_total);
    }
    const auto d = find_user(model.col_ids, user);
    return model.D.col(d).cwiseProduct(S_total);
}

Eigen::MatrixXd component_matrix(const NmfModel& model, std::size_t k) {
    if (k >= model.K)
        throw std::out_of_range("component " + std::to_string(k) + " out of range for K = " + std::to_string(model.K));
    const auto n = normalize(model);
    const auto kk = static_cast<Eigen::Index>(k);
    return n.S.col(kk) * n.D.row(kk);
}

Eigen::MatrixXd cosine_similarity_matrix(const NmfModel& a, const NmfModel& b, Basis basis) {
    const auto na = normalize(a), nb = normalize(b);
    const auto& ids_a = basis == Basis::D ? a.col_ids : a.row_ids;
    const auto& ids_b = basis == Basis::D ? b.col_ids : b.row_ids;

    std::unordered_map<std::string_view, Eigen::Index> universe;
    for (const auto& id : ids_a) universe.try_emplace(id, static_cast<Eigen::Index>(universe.size()));
    for (const auto& id : ids_b) universe.try_emplace(id, static_cast<Eigen::Index>(universe.size()));
    const auto U = static_cast<Eigen::Index>(universe.size());

    auto embed = [&](const Normalized& n, const std::vector<std::string>& ids, std::size_t K) {
        Eigen::MatrixXd V = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), U);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto u = universe.at(ids[i]);
            const auto ii = static_cast<Eigen::Index>(i);
            if (basis == Basis::D)
                V.col(u) = n.D.col(ii);
            else
                V.col(u) = n.S.row(ii).transpose();
        }
        return V;
    };
    const Eigen::MatrixXd Va = embed(na, ids_a, a.K), Vb = embed(nb, ids_b, b.K);
    Eigen::MatrixXd sim = Va * Vb.transpose();
    for (Eigen::Index k = 0; k < sim.rows(); ++k) {
        for (Eigen::Index l = 0; l < sim.cols(); ++l) {
            const double norm = Va.row(k).norm() * Vb.row(l).norm();
            sim(k, l) = norm > 0.0 ? sim(k, l) / norm : 0.0;
        }
    }
    return sim;
}

double poisson_loglik_gap(const Eigen::MatrixXd& X, const NmfModel& model, bool strict) {
    if (X.rows() != model.S.rows() || X.cols() != model.D.cols())
        throw std::invalid_argument("matrix shape does not match the NMF model");
    const Eigen::MatrixXd xi = model.S * model.D;
    // log P(x | lambda) = -lambda + x log lambda - log x!
    auto loglik = [](double x, double lambda) {
        if (x == 0.0) return -lambda;
        return -lambda + x * std::log(lambda) - std::lgamma(x + 1.0);
    };
    double gap = 0.0;
    for (Eigen::Index s = 0; s < X.rows(); ++s) {
        for (Eigen::Index d = 0; d < X.cols(); ++d) {
            const double x = X(s, d);
            if (x < 0.0) throw std::invalid_argument("Poisson counts must be non-negative");
            if (strict && x != std::floor(x))
                throw std::invalid_argument("Poisson counts must be integers (strict mode)");
            gap += loglik(x, x) - loglik(x, xi(s, d));
        }
    }
    return gap;
}

std::vector<ComponentSummary> summarize(const NmfModel& model, std::size_t top_n) {
    const auto n = normalize(model);
    std::vector<ComponentSummary> out;
    auto top = [&](const Eigen::VectorXd& v, const std::vector<std::string>& ids) {
        std::vector<std::size_t> idx(ids.size());
        std::iota(idx.begin(), idx.end(), 0);
        const auto m = std::min(top_n, idx.size());
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(), [&](auto x, auto y) {
            const double vx = v(static_cast<Eigen::Index>(x)), vy = v(static_cast<Eigen::Index>(y));
            return vx != vy ? vx > vy : ids[x] < ids[y];
        });
        std::vector<WeightedUser> list;
        for (std::size_t i = 0; i < m; ++i) list.push_back({ids[idx[i]], v(static_cast<Eigen::Index>(idx[i]))});
        return list;
    };
    for (std::size_t k = 0; k < model.K; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const Eigen::VectorXd dest = n.D.row(kk).transpose();
        const Eigen::VectorXd src = n.S.col(kk);
        ComponentSummary c;
        c.k = k;
        c.r = n.r(kk);
        c.ihh_dest = ihh({dest.data(), static_cast<std::size_t>(dest.size())});
        c.ihh_src = ihh({src.data(), static_cast<std::size_t>(src.size())});
        c.top_destinations = top(dest, model.col_ids);
        c.top_sources = top(src, model.row_ids);
        out.push_back(std::move(c));
    }
    return out;
}

void write_sources_csv(std::ostream& out, const NmfModel& model) {
    const auto n = normalize(model);
    std::vector<std::string> row{"user_id"};
    for (std::size_t k = 0; k < model.K; ++k) row.push_back("k" + std::to_string(k + 1));
    csv::write_row(out, row);
    for (std::size_t s = 0; s < model.row_ids.size(); ++s) {
        row.assign(1, model.row_ids[s]);
        for (std::size_t k = 0; k < model.K; ++k)
            row.push_back(csv::format_double(n.S(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k))));
        csv::write_row(out, row);
    }
}

void write_destinations_csv(std::ostream& out, const NmfModel& model) {
    const auto n = normalize(model);
    std::vector<std::string> row{"component"};
    row.insert(row.end(), model.col_ids.begin(), model.col_ids.end());
    csv::write_row(out, row);
    for (std::size_t k = 0; k < model.K; ++k) {
        row.assign(1, "k" + std::to_string(k + 1));
        for (std::size_t d = 0; d < model.col_ids.size(); ++d)
            row.push_back(csv::format_double(n.D(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d))));
        csv::write_row(out, row);
    }
}

std::string summary_json(const NmfModel& model) {
    nlohmann::ordered_json j;
    j["K"] = model.K;
    auto comps = summarize(model, 0);
    auto r = nlohmann::json::array(), src = nlohmann::json::array(), dest = nlohmann::json::array();
    for (const auto& c : comps) {
        r.push_back(csv::round12(c.r));
        src.push_back(csv::round12(c.ihh_src));
        dest.push_back(csv::round12(c.ihh_dest));
    }
    j["r"] = r;
    j["ihh_src"] = src;
    j["ihh_dest"] = dest;
    j["kl_final"] = csv::round12(model.kl_final);
    j["seed"] = model.seed;
    j["iterations"] = model.iterations;
    j["converged"] = model.converged;
    return j.dump(2);
}

}  // namespace txflow::nmf
