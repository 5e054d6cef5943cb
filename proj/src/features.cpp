#include "fnarx/features.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "fnarx/error.hpp"
#include "omp_for.hpp"

namespace fnarx {

void Truncation::validate() const {
  if (components == 0 && !(nu > 0.0 && nu <= 1.0)) {
    throw_invalid("explained variance target must lie in (0, 1], got " +
                  std::to_string(nu));
  }
}

namespace {

void pca_project(const PcaTransform& t, const double* w, std::ptrdiff_t stride,
                 double* out) {
  const auto n = static_cast<std::ptrdiff_t>(t.means.size());
  const auto k = t.components.cols();
  std::fill(out, out + k, 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (t.zero_variance[static_cast<std::size_t>(i)]) continue;
    const double z = (w[i * stride] - t.means[static_cast<std::size_t>(i)]) /
                     t.stds[static_cast<std::size_t>(i)];
    const double* row = t.components.data() + i * k;
    for (Eigen::Index j = 0; j < k; ++j) out[j] += z * row[j];
  }
}

void identity_project(const IdentityTransform& t, const double* w,
                      std::ptrdiff_t stride, double* out) {
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    out[k] = w[static_cast<std::ptrdiff_t>(t.columns[k]) * stride];
  }
}

void check_width(std::size_t expected, std::size_t got, const std::string& name) {
  if (expected != got) {
    throw_invalid("window width mismatch for channel '" + name + "': expected " +
                  std::to_string(expected) + ", got " + std::to_string(got));
  }
}

}  // namespace

std::size_t ChannelTransform::input_width() const {
  return kind == TransformKind::kPca ? pca.input_width() : identity.input_width;
}

std::size_t ChannelTransform::output_width() const {
  return kind == TransformKind::kPca ? pca.retained() : identity.columns.size();
}

void ChannelTransform::project(const double* w, std::ptrdiff_t stride,
                               double* out) const {
  if (kind == TransformKind::kPca) {
    pca_project(pca, w, stride, out);
  } else {
    identity_project(identity, w, stride, out);
  }
}

PcaTransform fit_pca(const Eigen::MatrixXd& block, const Truncation& truncation,
                     std::string channel) {
  truncation.validate();
  const auto rows = block.rows();
  const auto n = block.cols();
  if (rows < 2) throw_invalid("PCA needs at least 2 rows");
  if (n < 1) throw_invalid("PCA needs at least 1 column");
  if (!block.allFinite()) throw Error(ErrorKind::kNumerical, "non-finite value in PCA block");

  PcaTransform t;
  t.channel = std::move(channel);
  t.means.resize(static_cast<std::size_t>(n));
  t.stds.resize(static_cast<std::size_t>(n));
  t.zero_variance.assign(static_cast<std::size_t>(n), 0);

  Eigen::MatrixXd z(rows, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mu = block.col(j).mean();
    const double ss = (block.col(j).array() - mu).square().sum();
    double sd = std::sqrt(ss / static_cast<double>(rows - 1));
    const auto sj = static_cast<std::size_t>(j);
    if (!(sd > 0.0)) {
      sd = 1.0;
      t.zero_variance[sj] = 1;
      z.col(j).setZero();
    } else {
      z.col(j) = (block.col(j).array() - mu) / sd;
    }
    t.means[sj] = mu;
    t.stds[sj] = sd;
  }

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(rows - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumerical, "PCA eigendecomposition failed");
  }
  // Eigen returns ascending order.
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  Eigen::VectorXd values = eig.eigenvalues().reverse();
  t.eigenvalues.resize(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    t.eigenvalues[static_cast<std::size_t>(j)] = std::max(0.0, values(j));
    Eigen::Index imax = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (vectors(imax, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }

  double total = 0.0;
  for (double v : t.eigenvalues) total += v;
  std::size_t keep = 1;
  double achieved = 1.0;
  if (truncation.components > 0) {
    keep = std::min<std::size_t>(truncation.components, static_cast<std::size_t>(n));
    if (total > 0.0) {
      double partial = 0.0;
      for (std::size_t k = 0; k < keep; ++k) partial += t.eigenvalues[k];
      achieved = partial / total;
    }
  } else if (total > 0.0) {
    double partial = 0.0;
    keep = static_cast<std::size_t>(n);
    for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
      partial += t.eigenvalues[k];
      if (partial / total >= truncation.nu - 1e-12) {
        keep = k + 1;
        break;
      }
    }
    double kept = 0.0;
    for (std::size_t k = 0; k < keep; ++k) kept += t.eigenvalues[k];
    achieved = kept / total;
  }
  t.explained_variance = std::min(1.0, achieved);
  t.components = vectors.leftCols(static_cast<Eigen::Index>(keep));
  return t;
}

IdentityTransform make_identity(std::size_t input_width,
                                std::vector<std::size_t> columns,
                                std::string channel) {
  if (columns.empty()) throw_invalid("identity transform needs at least one column");
  for (auto c : columns) {
    if (c >= input_width) {
      throw_invalid("identity column " + std::to_string(c) +
                    " outside window of width " + std::to_string(input_width));
    }
  }
  return IdentityTransform{std::move(channel), input_width, std::move(columns)};
}

Eigen::MatrixXd apply(const PcaTransform& t, const Eigen::MatrixXd& block) {
  check_width(t.input_width(), static_cast<std::size_t>(block.cols()), t.channel);
  RowMatrix out(block.rows(), t.components.cols());
  for (Eigen::Index r = 0; r < block.rows(); ++r) {
    pca_project(t, block.data() + r, block.rows(), out.data() + r * out.cols());
  }
  return out;
}

Eigen::MatrixXd apply(const IdentityTransform& t, const Eigen::MatrixXd& block) {
  check_width(t.input_width, static_cast<std::size_t>(block.cols()), t.channel);
  Eigen::MatrixXd out(block.rows(), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = block.col(static_cast<Eigen::Index>(t.columns[k]));
  }
  return out;
}

void apply_single(const PcaTransform& t, std::span<const double> window,
                  std::span<double> out) {
  check_width(t.input_width(), window.size(), t.channel);
  if (out.size() != t.retained()) throw_invalid("PCA output span has wrong size");
  pca_project(t, window.data(), 1, out.data());
}

void apply_single(const IdentityTransform& t, std::span<const double> window,
                  std::span<double> out) {
  check_width(t.input_width, window.size(), t.channel);
  if (out.size() != t.columns.size()) throw_invalid("identity output span has wrong size");
  identity_project(t, window.data(), 1, out.data());
}

std::vector<std::pair<std::size_t, double>> explained_variance_curve(
    const PcaTransform& t) {
  double total = 0.0;
  for (double v : t.eigenvalues) total += v;
  std::vector<std::pair<std::size_t, double>> curve;
  double partial = 0.0;
  for (std::size_t k = 0; k < t.eigenvalues.size(); ++k) {
    partial += t.eigenvalues[k];
    const bool last = k + 1 == t.eigenvalues.size();
    double nu = total > 0.0 ? partial / total : 1.0;
    if (last || nu > 1.0) nu = 1.0;
    curve.emplace_back(k + 1, nu);
  }
  return curve;
}

namespace {

FeatureMatrix allocate_features(const std::vector<ChannelTransform>& transforms,
                                const InformationMatrix& info) {
  if (transforms.size() != info.n_channels()) {
    throw_invalid("expected " + std::to_string(info.n_channels()) +
                  " channel transforms, got " + std::to_string(transforms.size()));
  }
  FeatureMatrix fm;
  std::size_t total = 0;
  for (std::size_t j = 0; j < transforms.size(); ++j) {
    check_width(transforms[j].input_width(),
                static_cast<std::size_t>(info.blocks[j].cols()),
                transforms[j].channel());
    fm.widths.push_back(transforms[j].output_width());
    total += fm.widths.back();
  }
  fm.values.resize(static_cast<Eigen::Index>(info.rows()),
                   static_cast<Eigen::Index>(total));
  return fm;
}

void feature_row(const std::vector<ChannelTransform>& transforms,
                 const InformationMatrix& info, Eigen::Index r, FeatureMatrix& fm) {
  double* out = fm.values.data() + r * fm.values.cols();
  for (std::size_t j = 0; j < transforms.size(); ++j) {
    const auto& block = info.blocks[j];
    transforms[j].project(block.data() + r, block.rows(), out);
    out += fm.widths[j];
  }
}

}  // namespace

FeatureMatrix compute_features(const std::vector<ChannelTransform>& transforms,
                               const InformationMatrix& info) {
  auto fm = allocate_features(transforms, info);
  constexpr std::size_t kChunk = 256;
  const std::size_t rows = info.rows();
  detail::omp_for((rows + kChunk - 1) / kChunk, [&](std::size_t c) {
    const std::size_t end = std::min(rows, (c + 1) * kChunk);
    for (std::size_t r = c * kChunk; r < end; ++r) {
      feature_row(transforms, info, static_cast<Eigen::Index>(r), fm);
    }
  }, false);
  return fm;
}

FeatureMatrix compute_features_serial(
    const std::vector<ChannelTransform>& transforms,
    const InformationMatrix& info) {
  auto fm = allocate_features(transforms, info);
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(info.rows()); ++r) {
    feature_row(transforms, info, r, fm);
  }
  return fm;
}

}  // namespace fnarx
