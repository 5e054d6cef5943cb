#include "fnarx/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fnarx/error.hpp"

namespace fnarx {

OlsResult ols_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < 1 || x.cols() < 1) throw_invalid("OLS needs at least one row and column");
  if (x.rows() != y.size()) {
    throw_invalid("OLS: " + std::to_string(x.rows()) + " rows but " +
                  std::to_string(y.size()) + " targets");
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  OlsResult res;
  res.coefficients = cod.solve(y);
  res.rank = cod.rank();
  res.rank_deficient = res.rank < x.cols();
  return res;
}

SparseCoefficients ols_solve(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y,
                             const std::vector<std::size_t>& columns) {
  if (columns.empty()) throw_invalid("OLS needs at least one active column");
  Eigen::MatrixXd x(psi.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] >= static_cast<std::size_t>(psi.cols())) {
      throw_invalid("active column index out of range");
    }
    x.col(static_cast<Eigen::Index>(k)) = psi.col(static_cast<Eigen::Index>(columns[k]));
  }
  const auto res = ols_solve(x, y);
  SparseCoefficients out;
  out.values = Eigen::VectorXd::Zero(psi.cols());
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out.values(static_cast<Eigen::Index>(columns[k])) =
        res.coefficients(static_cast<Eigen::Index>(k));
  }
  out.active = columns;
  std::sort(out.active.begin(), out.active.end());
  out.rank_deficient = res.rank_deficient;
  return out;
}

std::vector<std::size_t> LarsPath::active(std::size_t k) const {
  if (k > entry_order.size()) throw_invalid("LARS iteration out of range");
  return {entry_order.begin(), entry_order.begin() + static_cast<std::ptrdiff_t>(k)};
}

Eigen::VectorXd LarsPath::original_scale(std::size_t k, double* intercept) const {
  if (k < 1 || k > iterations()) throw_invalid("LARS iteration out of range");
  const auto& beta = coefficients[k - 1];
  Eigen::VectorXd b = Eigen::VectorXd::Zero(beta.size());
  double c0 = y_mean;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta(j) == 0.0) continue;
    b(j) = beta(j) / scales(j);
    c0 -= b(j) * means(j);
  }
  if (intercept) *intercept = c0;
  return b;
}

namespace {

constexpr double kCollinearTol = 1e-10;
constexpr double kExactFitTol = 1e-12;
constexpr double kStepTol = 1e-12;

// Cholesky factor of the active Gram matrix, grown one column at a time.
class GramCholesky {
 public:
  explicit GramCholesky(Eigen::Index capacity) : l_(capacity, capacity) {}

  // Returns false (and leaves the factor unchanged) when x is numerically in
  // the span of the current columns.
  bool add(const Eigen::MatrixXd& xs, const std::vector<std::size_t>& active,
           std::size_t j) {
    const Eigen::Index m = size_;
    const auto xj = xs.col(static_cast<Eigen::Index>(j));
    Eigen::VectorXd g(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      g(i) = xs.col(static_cast<Eigen::Index>(active[static_cast<std::size_t>(i)])).dot(xj);
    }
    if (m > 0) {
      l_.topLeftCorner(m, m).triangularView<Eigen::Lower>().solveInPlace(g);
    }
    const double d2 = xj.squaredNorm() - g.squaredNorm();
    if (!(d2 > kCollinearTol)) return false;
    if (m > 0) l_.row(m).head(m) = g.transpose();
    l_(m, m) = std::sqrt(d2);
    ++size_;
    return true;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const auto l = l_.topLeftCorner(size_, size_).triangularView<Eigen::Lower>();
    Eigen::VectorXd x = l.solve(b);
    l.transpose().solveInPlace(x);
    return x;
  }

  Eigen::Index size() const { return size_; }

 private:
  Eigen::MatrixXd l_;
  Eigen::Index size_ = 0;
};

}  // namespace

LarsPath lars_path(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y,
                   std::size_t max_iters) {
  const Eigen::Index n = psi.rows();
  const Eigen::Index p = psi.cols();
  if (p < 1) throw_invalid("LARS needs at least one regressor");
  if (max_iters < 1) throw_invalid("LARS max_iters must be >= 1");
  if (y.size() != n) throw_invalid("LARS: regressor rows and targets differ in length");
  if (n < 2) throw_invalid("LARS needs at least 2 rows");
  if (!psi.allFinite() || !y.allFinite()) {
    throw Error(ErrorKind::kNumerical, "non-finite value in LARS input");
  }

  LarsPath path;
  path.means = psi.colwise().mean().transpose();
  path.scales.resize(p);
  path.y_mean = y.mean();

  Eigen::MatrixXd xs(n, p);
  std::vector<char> usable(static_cast<std::size_t>(p), 1);
  for (Eigen::Index j = 0; j < p; ++j) {
    xs.col(j) = psi.col(j).array() - path.means(j);
    const double norm = xs.col(j).norm();
    const double raw = psi.col(j).norm();
    if (!(norm > 1e-12 * raw) || norm == 0.0) {
      path.constant_columns.push_back(static_cast<std::size_t>(j));
      usable[static_cast<std::size_t>(j)] = 0;
      path.scales(j) = 1.0;
      xs.col(j).setZero();
    } else {
      path.scales(j) = norm;
      xs.col(j) /= norm;
    }
  }
  const Eigen::VectorXd yc = y.array() - path.y_mean;

  const auto p_eff = static_cast<std::size_t>(
      std::count(usable.begin(), usable.end(), static_cast<char>(1)));
  // Reaching `full` means a least-squares fit on the active set; stopping at
  // max_iters keeps the path on its breakpoints so shorter paths are prefixes.
  const std::size_t full = std::min(p_eff, static_cast<std::size_t>(n - 1));
  const std::size_t limit = std::min(max_iters, full);

  Eigen::VectorXd residual = yc;
  Eigen::VectorXd c = xs.transpose() * residual;
  double c0 = 0.0;
  Eigen::Index first = -1;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (usable[static_cast<std::size_t>(j)] && std::abs(c(j)) > c0) {
      c0 = std::abs(c(j));
      first = j;
    }
  }
  if (limit == 0 || first < 0 || !(c0 > 0.0)) {
    path.zero_response = first < 0 || !(c0 > 0.0);
    return path;
  }

  GramCholesky chol(static_cast<Eigen::Index>(limit) + 1);
  std::vector<std::size_t> active;
  std::vector<char> in_active(static_cast<std::size_t>(p), 0);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);

  auto try_add = [&](std::size_t j) {
    if (chol.add(xs, active, j)) {
      active.push_back(j);
      in_active[j] = 1;
      return true;
    }
    usable[j] = 0;
    path.rejected_columns.push_back(j);
    return false;
  };

  double entering_c = c0;
  std::size_t pending = static_cast<std::size_t>(first);
  bool have_pending = true;

  while (true) {
    if (have_pending && try_add(pending)) {
      path.entry_order.push_back(pending);
      path.entry_correlations.push_back(entering_c);
    }
    have_pending = false;
    if (active.empty()) break;

    // Equiangular direction for the current active set.
    double big_c = 0.0;
    for (auto j : active) big_c = std::max(big_c, std::abs(c(static_cast<Eigen::Index>(j))));
    const auto m = static_cast<Eigen::Index>(active.size());
    Eigen::VectorXd s(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      s(i) = c(static_cast<Eigen::Index>(active[static_cast<std::size_t>(i)])) >= 0.0 ? 1.0 : -1.0;
    }
    const Eigen::VectorXd ginv_s = chol.solve(s);
    const double sgs = s.dot(ginv_s);
    if (!(sgs > 0.0) || !std::isfinite(sgs)) {
      path.degenerate = true;
      break;
    }
    const double big_a = 1.0 / std::sqrt(sgs);
    const Eigen::VectorXd w = big_a * ginv_s;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i) {
      u += w(i) * xs.col(static_cast<Eigen::Index>(active[static_cast<std::size_t>(i)]));
    }
    const Eigen::VectorXd a = xs.transpose() * u;

    double gamma = std::numeric_limits<double>::infinity();
    Eigen::Index next = -1;
    if (active.size() < full) {
      const double den_tol = 1e-12 * big_a;
      for (Eigen::Index j = 0; j < p; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (!usable[sj] || in_active[sj]) continue;
        const double d1 = big_a - a(j);
        const double d2 = big_a + a(j);
        if (d1 > den_tol) {
          const double g = (big_c - c(j)) / d1;
          if (g > 0.0 && g < gamma) {
            gamma = g;
            next = j;
          }
        }
        if (d2 > den_tol) {
          const double g = (big_c + c(j)) / d2;
          if (g > 0.0 && g < gamma) {
            gamma = g;
            next = j;
          }
        }
      }
    }
    const bool final_step = next < 0;
    if (final_step) gamma = big_c / big_a;

    for (Eigen::Index i = 0; i < m; ++i) {
      beta(static_cast<Eigen::Index>(active[static_cast<std::size_t>(i)])) += gamma * w(i);
    }
    residual -= gamma * u;
    if (path.coefficients.size() < active.size()) {
      path.coefficients.push_back(beta);
    } else {
      path.coefficients.back() = beta;
    }

    if (final_step) break;
    if (gamma * big_a < kStepTol * c0) {
      path.degenerate = true;
      break;
    }
    c = xs.transpose() * residual;
    double c_max = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (usable[static_cast<std::size_t>(j)] || in_active[static_cast<std::size_t>(j)]) {
        c_max = std::max(c_max, std::abs(c(j)));
      }
    }
    if (c_max <= kExactFitTol * c0) {
      path.exact_fit = true;
      break;
    }
    if (active.size() >= limit) break;
    pending = static_cast<std::size_t>(next);
    entering_c = big_c - gamma * big_a;
    have_pending = true;
  }
  return path;
}

namespace {

std::ptrdiff_t intercept_column(const LarsPath& path, const Eigen::MatrixXd& psi) {
  for (auto j : path.constant_columns) {
    if (psi.col(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff() > 0.0) {
      return static_cast<std::ptrdiff_t>(j);
    }
  }
  return -1;
}

}  // namespace

SparseCoefficients hybrid_refit(const LarsPath& path, const Eigen::MatrixXd& psi,
                                const Eigen::VectorXd& y, std::size_t k) {
  if (k < 1 || k > path.iterations()) {
    throw_invalid("hybrid refit iteration " + std::to_string(k) + " outside path of " +
                  std::to_string(path.iterations()) + " iterations");
  }
  auto columns = path.active(k);
  const auto ic = intercept_column(path, psi);
  if (ic >= 0) columns.insert(columns.begin(), static_cast<std::size_t>(ic));
  return ols_solve(psi, y, columns);
}

HybridRefitter::HybridRefitter(const LarsPath& path, const Eigen::MatrixXd& psi,
                               const Eigen::VectorXd& y)
    : path_(path), psi_(psi), y_(y) {
  const auto ic = intercept_column(path, psi);
  if (ic >= 0) {
    order_.push_back(static_cast<std::size_t>(ic));
    offset_ = 1;
  }
  for (std::size_t k = 0; k < path.iterations(); ++k) order_.push_back(path.entry_order[k]);
  if (order_.empty()) return;
  Eigen::MatrixXd x(psi.rows(), static_cast<Eigen::Index>(order_.size()));
  for (std::size_t k = 0; k < order_.size(); ++k) {
    x.col(static_cast<Eigen::Index>(k)) = psi.col(static_cast<Eigen::Index>(order_[k]));
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::Index m = std::min(x.rows(), x.cols());
  r_ = qr.matrixQR().topLeftCorner(m, x.cols()).triangularView<Eigen::Upper>();
  qty_ = (qr.householderQ().adjoint() * y).head(m);
}

SparseCoefficients HybridRefitter::refit(std::size_t k) const {
  if (k < 1 || k > path_.iterations()) {
    throw_invalid("hybrid refit iteration " + std::to_string(k) + " outside path of " +
                  std::to_string(path_.iterations()) + " iterations");
  }
  const auto m = static_cast<Eigen::Index>(offset_ + k);
  if (m > r_.rows()) return hybrid_refit(path_, psi_, y_, k);
  const Eigen::VectorXd diag = r_.diagonal().head(m).cwiseAbs();
  if (!(diag.minCoeff() > 1e-10 * diag.maxCoeff())) {
    return hybrid_refit(path_, psi_, y_, k);
  }
  const Eigen::VectorXd sol =
      r_.topLeftCorner(m, m).triangularView<Eigen::Upper>().solve(qty_.head(m));
  SparseCoefficients out;
  out.values = Eigen::VectorXd::Zero(psi_.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    out.values(static_cast<Eigen::Index>(order_[static_cast<std::size_t>(i)])) = sol(i);
    out.active.push_back(order_[static_cast<std::size_t>(i)]);
  }
  std::sort(out.active.begin(), out.active.end());
  return out;
}

}  // namespace fnarx
