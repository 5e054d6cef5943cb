#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Householder>
#include <Eigen/QR>

namespace fnarx {

/// Dense coefficient vector with its nonzero support listed explicitly.
struct SparseCoefficients {
  Eigen::VectorXd values;
  std::vector<std::size_t> active;  // ascending
  bool rank_deficient = false;
};

/// Least squares on the given columns via complete orthogonal decomposition;
/// the minimum-norm solution when the block is rank deficient.
struct OlsResult {
  Eigen::VectorXd coefficients;
  Eigen::Index rank = 0;
  bool rank_deficient = false;
};

OlsResult ols_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// OLS restricted to `columns` of psi, scattered into a length-p vector.
SparseCoefficients ols_solve(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y,
                             const std::vector<std::size_t>& columns);

/// Least angle regression path. Columns are centred and scaled to unit
/// Euclidean norm (unit variance up to the constant factor sqrt(rows)),
/// y is centred. Constant columns never enter.
struct LarsPath {
  std::vector<std::size_t> entry_order;        // column entering at step k+1
  std::vector<Eigen::VectorXd> coefficients;   // standardized scale, length p
  std::vector<double> entry_correlations;      // max |x_j' r| when step k+1 began
  Eigen::VectorXd means;
  Eigen::VectorXd scales;                      // column norms after centring
  double y_mean = 0.0;
  std::vector<std::size_t> constant_columns;
  std::vector<std::size_t> rejected_columns;   // collinear with the active set
  bool zero_response = false;
  bool exact_fit = false;
  bool degenerate = false;

  std::size_t iterations() const { return coefficients.size(); }
  std::size_t n_columns() const { return static_cast<std::size_t>(means.size()); }
  /// First k entries of entry_order.
  std::vector<std::size_t> active(std::size_t k) const;
  /// Intercept and slopes in the original column scale at iteration k (1-based).
  Eigen::VectorXd original_scale(std::size_t k, double* intercept) const;
};

LarsPath lars_path(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y,
                   std::size_t max_iters);

/// OLS on the original columns active at iteration k (1-based) plus the
/// first constant column of psi, if any.
SparseCoefficients hybrid_refit(const LarsPath& path, const Eigen::MatrixXd& psi,
                                const Eigen::VectorXd& y, std::size_t k);

/// Hybrid refits of every path iteration from one Householder QR of the
/// columns in entry order. Falls back to hybrid_refit when a prefix is rank
/// deficient.
class HybridRefitter {
 public:
  HybridRefitter(const LarsPath& path, const Eigen::MatrixXd& psi,
                 const Eigen::VectorXd& y);

  SparseCoefficients refit(std::size_t k) const;

 private:
  const LarsPath& path_;
  const Eigen::MatrixXd& psi_;
  const Eigen::VectorXd& y_;
  std::vector<std::size_t> order_;  // intercept first when present
  std::size_t offset_ = 0;          // 1 with an intercept column
  Eigen::MatrixXd r_;
  Eigen::VectorXd qty_;
};

}  // namespace fnarx
