#include "txflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace txflow::kernels {

void set_thread_count(int n) {
#ifdef _OPENMP
    static const int default_threads = omp_get_max_threads();
    omp_set_num_threads(n > 0 ? n : default_threads);
#else
    (void)n;
#endif
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

LaplacianCsr build_laplacian(std::size_t n, std::span<const WeightedPair> pairs) {
    LaplacianCsr L;
    L.row_ptr.assign(n + 1, 0);
    L.degree.assign(n, 0.0);
    for (const auto& p : pairs) {
        if (p.i == p.j || p.i >= n || p.j >= n) throw std::invalid_argument("bad Laplacian pair");
        ++L.row_ptr[p.i + 1];
        ++L.row_ptr[p.j + 1];
    }
    for (std::size_t i = 0; i < n; ++i) L.row_ptr[i + 1] += L.row_ptr[i];
    L.col.resize(static_cast<std::size_t>(L.row_ptr[n]));
    L.weight.resize(L.col.size());
    std::vector<std::int64_t> fill(L.row_ptr.begin(), L.row_ptr.end() - 1);
    for (const auto& p : pairs) {
        L.col[static_cast<std::size_t>(fill[p.i])] = p.j;
        L.weight[static_cast<std::size_t>(fill[p.i]++)] = p.w;
        L.col[static_cast<std::size_t>(fill[p.j])] = p.i;
        L.weight[static_cast<std::size_t>(fill[p.j]++)] = p.w;
        L.degree[p.i] += p.w;
        L.degree[p.j] += p.w;
    }
    return L;
}

void laplacian_apply(const LaplacianCsr& L, std::span<const double> x, std::span<double> y) {
    const auto n = static_cast<std::int64_t>(L.size());
#pragma omp parallel for schedule(static) if (n > 2048)
    for (std::int64_t i = 0; i < n; ++i) {
        double acc = L.degree[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        for (auto p = L.row_ptr[static_cast<std::size_t>(i)]; p < L.row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
            acc -= L.weight[static_cast<std::size_t>(p)] * x[L.col[static_cast<std::size_t>(p)]];
        y[static_cast<std::size_t>(i)] = acc;
    }
}

void laplacian_apply_ref(const LaplacianCsr& L, std::span<const double> x, std::span<double> y) {
    const std::size_t n = L.size();
    for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (auto p = L.row_ptr[i]; p < L.row_ptr[i + 1]; ++p) {
            const auto j = L.col[static_cast<std::size_t>(p)];
            const double w = L.weight[static_cast<std::size_t>(p)];
            // sum_j (delta_ij sum_k w_ik - w_ij) x_j, one neighbour at a time
            y[i] += w * (x[i] - x[j]);
        }
    }
}

// ---------------------------------------------------------------------------

SparseCounts::SparseCounts(const Eigen::MatrixXd& dense) : rows_(dense.rows()), cols_(dense.cols()) {
    row_ptr_.assign(static_cast<std::size_t>(rows_) + 1, 0);
    col_ptr_.assign(static_cast<std::size_t>(cols_) + 1, 0);
    for (Eigen::Index s = 0; s < rows_; ++s) {
        for (Eigen::Index d = 0; d < cols_; ++d) {
            const double v = dense(s, d);
            if (v == 0.0) continue;
            col_idx_.push_back(static_cast<std::uint32_t>(d));
            values_.push_back(v);
            total_ += v;
            ++col_ptr_[static_cast<std::size_t>(d) + 1];
        }
        row_ptr_[static_cast<std::size_t>(s) + 1] = static_cast<std::int64_t>(values_.size());
    }
    for (std::size_t d = 0; d < static_cast<std::size_t>(cols_); ++d) col_ptr_[d + 1] += col_ptr_[d];
    row_idx_.resize(values_.size());
    csc_slot_.resize(values_.size());
    std::vector<std::int64_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
    for (std::size_t s = 0; s < static_cast<std::size_t>(rows_); ++s) {
        for (auto p = row_ptr_[s]; p < row_ptr_[s + 1]; ++p) {
            const auto d = col_idx_[static_cast<std::size_t>(p)];
            const auto q = static_cast<std::size_t>(fill[d]++);
            row_idx_[q] = static_cast<std::uint32_t>(s);
            csc_slot_[q] = p;
        }
    }
}

void model_at_nonzeros(const SparseCounts& X, const RowMatrix& S, const Eigen::MatrixXd& D, std::vector<double>& xi) {
    xi.resize(X.nnz());
    const auto rows = static_cast<std::int64_t>(X.rows());
    const auto K = static_cast<std::size_t>(S.cols());
    const auto* row_ptr = X.row_ptr().data();
    const auto* col_idx = X.col_idx().data();
    double* out = xi.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < rows; ++s) {
        const double* srow = S.data() + static_cast<std::size_t>(s) * K;
        for (auto p = row_ptr[s]; p < row_ptr[s + 1]; ++p) {
            const double* dcol = D.data() + static_cast<std::size_t>(col_idx[p]) * K;
            double acc = 0.0;
#pragma omp simd reduction(+ : acc)
            for (std::size_t k = 0; k < K; ++k) acc += srow[k] * dcol[k];
            out[p] = acc;
        }
    }
}

void kl_update_sources(const SparseCounts& X, RowMatrix& S, const Eigen::MatrixXd& D, double eps) {
    std::vector<double> xi;
    model_at_nonzeros(X, S, D, xi);
    kl_update_sources(X, S, D, eps, xi);
}

void kl_update_sources(const SparseCounts& X, RowMatrix& S, const Eigen::MatrixXd& D, double eps,
                       std::span<const double> xi) {
    const Eigen::VectorXd denom = D.rowwise().sum().array() + eps;
    const auto rows = static_cast<std::int64_t>(X.rows());
    const auto K = static_cast<std::size_t>(S.cols());
    const auto* row_ptr = X.row_ptr().data();
    const auto* col_idx = X.col_idx().data();
    const auto* values = X.values().data();
#pragma omp parallel
    {
        std::vector<double> num(K);
#pragma omp for schedule(static)
        for (std::int64_t s = 0; s < rows; ++s) {
            std::fill(num.begin(), num.end(), 0.0);
            for (auto p = row_ptr[s]; p < row_ptr[s + 1]; ++p) {
                const double q = values[p] / (xi[static_cast<std::size_t>(p)] + eps);
                const double* dcol = D.data() + static_cast<std::size_t>(col_idx[p]) * K;
#pragma omp simd
                for (std::size_t k = 0; k < K; ++k) num[k] += dcol[k] * q;
            }
            double* srow = S.data() + static_cast<std::size_t>(s) * K;
            for (std::size_t k = 0; k < K; ++k) srow[k] *= num[k] / denom(static_cast<Eigen::Index>(k));
        }
    }
}

void kl_update_sources_ref(const Eigen::MatrixXd& X, Eigen::MatrixXd& S, const Eigen::MatrixXd& D, double eps) {
    const Eigen::MatrixXd xi = S * D;
    Eigen::MatrixXd next = S;
    for (Eigen::Index s = 0; s < X.rows(); ++s) {
        for (Eigen::Index k = 0; k < S.cols(); ++k) {
            double num = 0.0, den = 0.0;
            for (Eigen::Index d = 0; d < X.cols(); ++d) {
                num += D(k, d) * X(s, d) / (xi(s, d) + eps);
                den += D(k, d);
            }
            next(s, k) = S(s, k) * num / (den + eps);
        }
    }
    S = next;
}

void kl_update_destinations(const SparseCounts& X, const RowMatrix& S, Eigen::MatrixXd& D, double eps) {
    std::vector<double> xi;
    model_at_nonzeros(X, S, D, xi);
    kl_update_destinations(X, S, D, eps, xi);
}

void kl_update_destinations(const SparseCounts& X, const RowMatrix& S, Eigen::MatrixXd& D, double eps,
                            std::span<const double> xi) {
    const Eigen::RowVectorXd denom = S.colwise().sum().array() + eps;
    const auto cols = static_cast<std::int64_t>(X.cols());
    const auto K = static_cast<std::size_t>(S.cols());
    const auto* col_ptr = X.col_ptr().data();
    const auto* row_idx = X.row_idx().data();
    const auto* slot = X.csc_slot().data();
    const auto* values = X.values().data();
#pragma omp parallel
    {
        std::vector<double> num(K);
#pragma omp for schedule(static)
        for (std::int64_t d = 0; d < cols; ++d) {
            std::fill(num.begin(), num.end(), 0.0);
            for (auto q = col_ptr[d]; q < col_ptr[d + 1]; ++q) {
                const auto p = static_cast<std::size_t>(slot[q]);
                const double ratio = values[p] / (xi[p] + eps);
                const double* srow = S.data() + static_cast<std::size_t>(row_idx[q]) * K;
#pragma omp simd
                for (std::size_t k = 0; k < K; ++k) num[k] += srow[k] * ratio;
            }
            double* dcol = D.data() + static_cast<std::size_t>(d) * K;
            for (std::size_t k = 0; k < K; ++k) dcol[k] *= num[k] / denom(static_cast<Eigen::Index>(k));
        }
    }
}

void kl_update_destinations_ref(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S, Eigen::MatrixXd& D,
                                double eps) {
    const Eigen::MatrixXd xi = S * D;
    Eigen::MatrixXd next = D;
    for (Eigen::Index k = 0; k < D.rows(); ++k) {
        for (Eigen::Index d = 0; d < X.cols(); ++d) {
            double num = 0.0, den = 0.0;
            for (Eigen::Index s = 0; s < X.rows(); ++s) {
                num += S(s, k) * X(s, d) / (xi(s, d) + eps);
                den += S(s, k);
            }
            next(k, d) = D(k, d) * num / (den + eps);
        }
    }
    D = next;
}

double kl_divergence(const SparseCounts& X, const RowMatrix& S, const Eigen::MatrixXd& D) {
    std::vector<double> xi;
    model_at_nonzeros(X, S, D, xi);
    return kl_divergence(X, S, D, xi);
}

double kl_divergence(const SparseCounts& X, const RowMatrix& S, const Eigen::MatrixXd& D, std::span<const double> xi) {
    const auto& values = X.values();
    const auto nnz = static_cast<std::int64_t>(values.size());
    double log_term = 0.0;
#pragma omp parallel for reduction(+ : log_term) schedule(static)
    for (std::int64_t p = 0; p < nnz; ++p) {
        const double x = values[static_cast<std::size_t>(p)];
        log_term += x * std::log(x / xi[static_cast<std::size_t>(p)]);
    }
    const double model_total = S.colwise().sum().dot(D.rowwise().sum().transpose());
    return log_term - X.total() + model_total;
}

namespace {

/// R = X / (xi + eps), zero where X is zero.
Eigen::MatrixXd ratio_dense(const Eigen::MatrixXd& X, const Eigen::MatrixXd& xi, double eps) {
    Eigen::MatrixXd R(X.rows(), X.cols());
    const auto n = static_cast<std::int64_t>(R.size());
    double* r = R.data();
    const double* x = X.data();
    const double* m = xi.data();
#pragma omp parallel for schedule(static) if (n > 65536)
    for (std::int64_t i = 0; i < n; ++i) r[i] = x[i] == 0.0 ? 0.0 : x[i] / (m[i] + eps);
    return R;
}

}  // namespace

void kl_update_sources_dense(const Eigen::MatrixXd& X, Eigen::MatrixXd& S, const Eigen::MatrixXd& D, double eps) {
    kl_update_sources_dense(X, S, D, eps, S * D);
}

void kl_update_sources_dense(const Eigen::MatrixXd& X, Eigen::MatrixXd& S, const Eigen::MatrixXd& D, double eps,
                             const Eigen::MatrixXd& xi) {
    const Eigen::MatrixXd R = ratio_dense(X, xi, eps);
    const Eigen::RowVectorXd denom = D.rowwise().sum().transpose().array() + eps;
    S.array() *= (R * D.transpose()).array().rowwise() / denom.array();
}

void kl_update_destinations_dense(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S, Eigen::MatrixXd& D,
                                  double eps) {
    kl_update_destinations_dense(X, S, D, eps, S * D);
}

void kl_update_destinations_dense(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S, Eigen::MatrixXd& D, double eps,
                                  const Eigen::MatrixXd& xi) {
    const Eigen::MatrixXd R = ratio_dense(X, xi, eps);
    const Eigen::VectorXd denom = S.colwise().sum().transpose().array() + eps;
    D.array() *= (S.transpose() * R).array().colwise() / denom.array();
}

double kl_divergence_dense(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S, const Eigen::MatrixXd& D) {
    return kl_divergence_dense(X, S * D);
}

double kl_divergence_dense(const Eigen::MatrixXd& X, const Eigen::MatrixXd& xi) {
    const auto n = static_cast<std::int64_t>(xi.size());
    const double* x = X.data();
    const double* m = xi.data();
    double log_term = 0.0;
#pragma omp parallel for reduction(+ : log_term) schedule(static) if (n > 65536)
    for (std::int64_t i = 0; i < n; ++i)
        if (x[i] > 0.0) log_term += x[i] * std::log(x[i] / m[i]);
    return log_term - X.sum() + xi.sum();
}

double kl_divergence_ref(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S, const Eigen::MatrixXd& D) {
    const Eigen::MatrixXd xi = S * D;
    double sum = 0.0;
    for (Eigen::Index s = 0; s < X.rows(); ++s)
        for (Eigen::Index d = 0; d < X.cols(); ++d) {
            const double x = X(s, d);
            if (x > 0) sum += x * std::log(x / xi(s, d));
            sum += xi(s, d) - x;
        }
    return sum;
}

}  // namespace txflow::kernels
