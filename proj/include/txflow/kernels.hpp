#pragma once

// Data-parallel inner loops used by the Hodge solver and KL-NMF. Every kernel
// has a serial `_ref` twin written directly from the defining formula; the
// tests check the parallel version against it and bench/ times both.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace txflow::kernels {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Caps the OpenMP worker count; n <= 0 restores the runtime default.
void set_thread_count(int n);
int thread_count();

// ---------------------------------------------------------------------------
// Graph Laplacian L = diag(sum_k w_ik) - w in compressed-row form.

struct LaplacianCsr {
    std::vector<std::int64_t> row_ptr;  // size n + 1
    std::vector<std::uint32_t> col;     // off-diagonal neighbours
    std::vector<double> weight;         // w_ij > 0, parallel to col
    std::vector<double> degree;         // sum_j w_ij

    std::size_t size() const { return degree.size(); }
};

/// Builds L from symmetric undirected edges (i, j, w_ij) with i != j.
struct WeightedPair {
    std::uint32_t i;
    std::uint32_t j;
    double w;
};
LaplacianCsr build_laplacian(std::size_t n, std::span<const WeightedPair> pairs);

/// y = L x
void laplacian_apply(const LaplacianCsr& L, std::span<const double> x, std::span<double> y);
void laplacian_apply_ref(const LaplacianCsr& L, std::span<const double> x, std::span<double> y);

// ---------------------------------------------------------------------------
// KL-NMF on a matrix stored by its non-zeros. Zero cells of X only enter the
// objective through sum(xi), so every kernel runs in O(nnz * K).

class SparseCounts {
public:
    explicit SparseCounts(const Eigen::MatrixXd& dense);

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }
    double total() const { return total_; }

    // CSR view
    const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::uint32_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }
    // CSC view; csc_slot maps each CSC entry to its CSR position
    const std::vector<std::int64_t>& col_ptr() const { return col_ptr_; }
    const std::vector<std::uint32_t>& row_idx() const { return row_idx_; }
    const std::vector<std::int64_t>& csc_slot() const { return csc_slot_; }

private:
    Eigen::Index rows_ = 0, cols_ = 0;
    double total_ = 0.0;
    std::vector<std::int64_t> row_ptr_;
    std::vector<std::uint32_t> col_idx_;
    std::vector<double> values_;
    std::vector<std::int64_t> col_ptr_;
    std::vector<std::uint32_t> row_idx_;
    std::vector<std::int64_t> csc_slot_;
};

/// xi_sd = (S D)_sd at every non-zero of X, in CSR order.
void model_at_nonzeros(const SparseCounts& X, const RowMatrix& S, const Eigen::MatrixXd& D, std::vector<double>& xi);

/// Multiplicative update of the N x K source factor:
///   S_sk <- S_sk * sum_d D_kd X_sd / (xi_sd + eps) / (sum_d D_kd + eps)
/// with xi = S D evaluated before the update.
void kl_update_sources(const SparseCounts& X, RowMatrix& S, const Eigen::MatrixXd& D, double eps);
void kl_update_sources(const SparseCounts& X, RowMatrix& S, const Eigen::MatrixXd& D, double eps,
                       std::span<const double> xi);
void kl_update_sources_ref(const Eigen::MatrixXd& X, Eigen::MatrixXd& S, const Eigen::MatrixXd& D, double eps);

/// Multiplicative update of the K x M destination factor:
///   D_kd <- D_kd * sum_s S_sk X_sd / (xi_sd + eps) / (sum_s S_sk + eps)
void kl_update_destinations(const SparseCounts& X, const RowMatrix& S, Eigen::MatrixXd& D, double eps);
void kl_update_destinations(const SparseCounts& X, const RowMatrix& S, Eigen::MatrixXd& D, double eps,
                            std::span<const double> xi);
void kl_update_destinations_ref(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S, Eigen::MatrixXd& D,
                                double eps);

// Dense-input variants of the same updates for matrices with few zeros; the
// two matrix products go through Eigen's blocked GEMM. The overloads taking
// xi reuse S D already evaluated at the current factors.
void kl_update_sources_dense(const Eigen::MatrixXd& X, Eigen::MatrixXd& S, const Eigen::MatrixXd& D, double eps);
void kl_update_sources_dense(const Eigen::MatrixXd& X, Eigen::MatrixXd& S, const Eigen::MatrixXd& D, double eps,
                             const Eigen::MatrixXd& xi);
void kl_update_destinations_dense(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S, Eigen::MatrixXd& D,
                                  double eps);
void kl_update_destinations_dense(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S, Eigen::MatrixXd& D, double eps,
                                  const Eigen::MatrixXd& xi);
double kl_divergence_dense(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S, const Eigen::MatrixXd& D);
double kl_divergence_dense(const Eigen::MatrixXd& X, const Eigen::MatrixXd& xi);

/// Generalized KL divergence sum_sd X log(X/xi) - X + xi with 0 log 0 = 0.
double kl_divergence(const SparseCounts& X, const RowMatrix& S, const Eigen::MatrixXd& D);
double kl_divergence(const SparseCounts& X, const RowMatrix& S, const Eigen::MatrixXd& D, std::span<const double> xi);
double kl_divergence_ref(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S, const Eigen::MatrixXd& D);

}  // namespace txflow::kernels
