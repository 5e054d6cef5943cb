#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace fnarx::test {

struct Standardized {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

inline Standardized standardize(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y) {
  Standardized s;
  s.x = psi.rowwise() - psi.colwise().mean();
  for (Eigen::Index j = 0; j < s.x.cols(); ++j) s.x.col(j).normalize();
  s.y = y.array() - y.mean();
  return s;
}

inline bool contains(const std::vector<std::size_t>& v, std::size_t j) {
  return std::find(v.begin(), v.end(), j) != v.end();
}

inline double soft(double z, double l) { return z > l ? z - l : (z < -l ? z + l : 0.0); }

// Cyclic coordinate descent for 0.5 |y - X b|^2 + lambda |b|_1 with unit-norm
// columns, warm-started from b.
inline Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                         Eigen::VectorXd b) {
  Eigen::VectorXd r = y - x * b;
  for (int sweep = 0; sweep < 200000; ++sweep) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double old = b(j);
      const double nb = soft(x.col(j).dot(r) + old, lambda);
      if (nb != old) {
        r -= (nb - old) * x.col(j);
        b(j) = nb;
        change = std::max(change, std::abs(nb - old));
      }
    }
    if (change < 1e-15) break;
  }
  return b;
}

inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  return (a.transpose() * a).inverse() * (a.transpose() * y);
}

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd psi(x.rows(), x.cols() + 1);
  psi.col(0).setOnes();
  psi.rightCols(x.cols()) = x;
  return psi;
}


}  // namespace fnarx::test
