#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fnarx/windowing.hpp"

namespace fnarx {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class TransformKind { kPca, kIdentity };

/// How many principal components to keep: the smallest count reaching
/// explained variance `nu`, or exactly `components` when that is nonzero.
struct Truncation {
  double nu = 0.95;
  std::size_t components = 0;

  void validate() const;
};

/// Standardize-then-project map of one channel window.
struct PcaTransform {
  std::string channel;
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<char> zero_variance;  // columns whose sample std was 0
  std::vector<double> eigenvalues;  // all n, descending, clamped at 0
  RowMatrix components;             // n x retained, orthonormal columns
  double explained_variance = 1.0;

  std::size_t input_width() const { return means.size(); }
  std::size_t retained() const { return static_cast<std::size_t>(components.cols()); }
};

/// Pass-through of selected window columns (classical lag regressors).
struct IdentityTransform {
  std::string channel;
  std::size_t input_width = 0;
  std::vector<std::size_t> columns;
};

/// Either transform behind one interface; the forecast loop calls project().
struct ChannelTransform {
  TransformKind kind = TransformKind::kPca;
  PcaTransform pca;
  IdentityTransform identity;

  const std::string& channel() const {
    return kind == TransformKind::kPca ? pca.channel : identity.channel;
  }
  std::size_t input_width() const;
  std::size_t output_width() const;

  /// Features of one window read as w[0], w[stride], ..., newest first.
  /// A negative stride walks a time series backwards from the newest sample.
  void project(const double* w, std::ptrdiff_t stride, double* out) const;
};

struct FeatureMatrix {
  RowMatrix values;                 // rows x total width
  std::vector<std::size_t> widths;  // per channel

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t width() const { return static_cast<std::size_t>(values.cols()); }
};

PcaTransform fit_pca(const Eigen::MatrixXd& block, const Truncation& truncation,
                     std::string channel = {});

IdentityTransform make_identity(std::size_t input_width,
                                std::vector<std::size_t> columns,
                                std::string channel = {});

Eigen::MatrixXd apply(const PcaTransform& t, const Eigen::MatrixXd& block);
Eigen::MatrixXd apply(const IdentityTransform& t, const Eigen::MatrixXd& block);

void apply_single(const PcaTransform& t, std::span<const double> window,
                  std::span<double> out);
void apply_single(const IdentityTransform& t, std::span<const double> window,
                  std::span<double> out);

/// (ñ, ν) for ñ = 1 .. n.
std::vector<std::pair<std::size_t, double>> explained_variance_curve(
    const PcaTransform& t);

/// Feature matrix of all channels, parallel over rows.
FeatureMatrix compute_features(const std::vector<ChannelTransform>& transforms,
                               const InformationMatrix& info);
FeatureMatrix compute_features_serial(
    const std::vector<ChannelTransform>& transforms,
    const InformationMatrix& info);

}  // namespace fnarx
