#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "txflow/matrix_io.hpp"

namespace txflow::nmf {

struct NmfOptions {
    long max_iter = 2000;
    double tol = 1e-7;    // stop when the relative objective decrease falls below this
    double eps = 1e-12;   // guards the ratios in the multiplicative updates
};

/// X ~ S D with S (N x K), D (K x M) non-negative, fitted under the
/// generalized KL divergence. Components are ordered by descending r_k.
struct NmfModel {
    std::size_t K = 0;
    Eigen::MatrixXd S;
    Eigen::MatrixXd D;
    Eigen::VectorXd r;
    std::vector<std::string> row_ids;  // sources
    std::vector<std::string> col_ids;  // destinations
    double kl_final = 0.0;
    long iterations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    std::vector<double> objective_trace;  // KL after init and after every iteration

    std::size_t rows() const { return static_cast<std::size_t>(S.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(D.cols()); }
};

/// NNDSVD initialisation; cells the SVD leaves at zero are filled with the
/// mean of X times a factor drawn uniformly from [0.5, 1.5) using `seed`.
void nndsvd_init(const Eigen::MatrixXd& X, std::size_t K, std::uint64_t seed, Eigen::MatrixXd& S,
                 Eigen::MatrixXd& D);

/// Throws std::invalid_argument when K is 0 or exceeds min(N, M), X has a
/// negative entry, or X is all zero.
NmfModel nmf_fit(const LabeledMatrix& X, std::size_t K, std::uint64_t seed, const NmfOptions& options = {});
NmfModel nmf_fit(const Eigen::MatrixXd& X, std::size_t K, std::uint64_t seed, const NmfOptions& options = {});

struct Normalized {
    Eigen::MatrixXd S;        // columns sum to 1
    Eigen::MatrixXd D;        // rows sum to 1
    Eigen::VectorXd r;        // sums to 1
    Eigen::VectorXd S_total;  // S_k = sum_s S_sk
    Eigen::VectorXd D_total;  // D_k = sum_d D_kd
};

/// Throws NumericError if some component has an all-zero column of S or row
/// of D (fit with a smaller K).
Normalized normalize(const NmfModel& model);

/// p_sd = sum_k r_k S~_sk D~_kd; sums to 1.
Eigen::MatrixXd probability_matrix(const NmfModel& model);

/// Inverse Herfindahl-Hirschman index (sum x_i^2)^-1 of a share vector.
double ihh(std::span<const double> shares);

enum class Role { Source, Destination };

/// Source role: S_sk D_k, the weights of the normalized destination bases
/// in the row of `user`. Destination role: D_kd S_k. Throws
/// std::out_of_range for an unknown user.
Eigen::VectorXd expand_user(const NmfModel& model, std::string_view user, Role role);

/// Outer product S~_{.k} D~_{k.}; zero-based k. Entries sum to 1.
Eigen::MatrixXd component_matrix(const NmfModel& model, std::size_t k);

enum class Basis { D, S };

/// Cosine similarity between every basis vector of `a` and of `b`, aligned by
/// user id over the union of both node sets. Zero vectors give 0.
Eigen::MatrixXd cosine_similarity_matrix(const NmfModel& a, const NmfModel& b, Basis basis);

/// sum_sd [log P(X_sd | X_sd) - log P(X_sd | xi_sd)] under a Poisson model.
/// Strict mode rejects non-integer X.
double poisson_loglik_gap(const Eigen::MatrixXd& X, const NmfModel& model, bool strict = true);

struct WeightedUser {
    std::string user;
    double weight;
};

struct ComponentSummary {
    std::size_t k;  // zero-based
    double r;
    double ihh_dest;
    double ihh_src;
    std::vector<WeightedUser> top_destinations;
    std::vector<WeightedUser> top_sources;
};

std::vector<ComponentSummary> summarize(const NmfModel& model, std::size_t top_n = 10);

/// S~ with user rows and columns k1..kK.
void write_sources_csv(std::ostream& out, const NmfModel& model);
/// D~ with rows k1..kK and user columns.
void write_destinations_csv(std::ostream& out, const NmfModel& model);
/// {K, r, ihh_src, ihh_dest, kl_final, seed, iterations, converged}
std::string summary_json(const NmfModel& model);

}  // namespace txflow::nmf
