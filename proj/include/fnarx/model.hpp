#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fnarx/basis.hpp"
#include "fnarx/features.hpp"
#include "fnarx/regression.hpp"
#include "fnarx/timeseries.hpp"
#include "fnarx/windowing.hpp"

namespace fnarx {

/// Feature map of one channel.
struct ChannelSpec {
  TransformKind kind = TransformKind::kPca;
  Truncation truncation;
  /// Identity only. Exogenous lags count from 0 (current sample), output
  /// lags from 1. Empty keeps every sample of the window.
  std::vector<std::size_t> lags;
  /// Window length in seconds; 0 uses ModelConfig::memory_s. Ignored for
  /// identity channels with explicit lags.
  double memory_s = 0.0;
};

struct BasisConfig {
  std::size_t degree = 1;
  std::size_t interaction = 1;
  double q = 1.0;
};

enum class ForecastInit { kZeros, kTruth };

struct ModelConfig {
  double memory_s = 1.0;
  ChannelSpec exogenous;  // applied to every exogenous channel
  ChannelSpec output;
  std::vector<ChannelSpec> channels;  // optional: exogenous in order, then output
  BasisConfig basis;
  std::size_t max_iters = 200;
  std::size_t k_eval = 10;
  std::size_t max_rows = 0;  // 0 keeps every row
  std::optional<double> gamma;  // default 1e-8 x mean output variance
  std::uint64_t seed = 0;
  ForecastInit init = ForecastInit::kZeros;
  double divergence_factor = 1e3;

  void validate() const;
  const ChannelSpec& channel(std::size_t j, std::size_t n_exogenous) const;

  /// Classical NARX: identity maps over the given lags.
  static ModelConfig classical(const LagSpec& lags, BasisConfig basis = {});
};

MemoryConfig resolve_memory(const ModelConfig& config, std::size_t n_exogenous,
                            double dt);

struct PathEvaluation {
  std::size_t iteration = 0;
  double mean_nmse = 0.0;
  std::size_t n_terms = 0;
};

struct FittedModel {
  static constexpr const char* kSchema = "fnarx.model/1";

  ModelConfig config;
  double dt = 0.0;
  std::vector<std::string> exogenous_names;
  std::string output_name;
  MemoryConfig memory;
  std::vector<ChannelTransform> transforms;  // exogenous..., output
  MultiIndexSet basis;
  SparseCoefficients coefficients;
  std::size_t chosen_iteration = 0;
  std::size_t path_length = 0;
  std::vector<PathEvaluation> evaluations;
  double gamma = 0.0;
  std::size_t training_trajectories = 0;
  std::size_t training_rows = 0;  // rows behind transform statistics and regression
  bool exact_fit = false;
  bool degenerate_path = false;

  std::size_t n_features() const { return basis.dimension(); }
  std::size_t n_nonzero() const { return coefficients.active.size(); }
  /// Feature count contributed by channel j.
  std::vector<std::size_t> feature_widths() const;
  void validate() const;
};

struct ForecastResult {
  std::vector<double> prediction;  // grid-aligned; NaN after a divergence
  std::size_t init_span = 0;       // leading samples taken from the init
  std::optional<std::size_t> diverged_at;
  std::optional<double> nmse;      // when the trajectory carries an output

  bool diverged() const { return diverged_at.has_value(); }
};

struct ForecastOptions {
  ForecastInit init = ForecastInit::kZeros;
  double gamma = 0.0;  // NMSE regularizer
  /// |ŷ| beyond this marks divergence, like a non-finite value.
  double divergence_bound = std::numeric_limits<double>::infinity();
};

/// Closed-loop forecast feeding predictions back as autoregressive inputs.
ForecastResult forecast(const FittedModel& model, const Trajectory& traj,
                        const ForecastOptions& options = {});

/// Closed-loop forecast from explicit initial output values (size >= init span).
ForecastResult forecast(const FittedModel& model, const Trajectory& traj,
                        const std::vector<double>& init,
                        const ForecastOptions& options = {});

/// One-step-ahead prediction from true past outputs. The first init_span
/// samples copy the truth.
ForecastResult predict_osa(const FittedModel& model, const Trajectory& traj,
                           double gamma = 0.0);

/// Forecasts over a design, parallel over trajectories.
std::vector<ForecastResult> forecast_design(const FittedModel& model,
                                            const ExperimentalDesign& design,
                                            const ForecastOptions& options = {});
std::vector<ForecastResult> forecast_design_serial(const FittedModel& model,
                                                   const ExperimentalDesign& design,
                                                   const ForecastOptions& options = {});

/// Windowing, transforms and features of a training design, shared by every
/// basis configuration fitted on it.
struct PreparedDesign {
  const ExperimentalDesign* design = nullptr;
  MemoryConfig memory;
  InformationMatrix info;
  std::vector<ChannelTransform> transforms;
  FeatureMatrix features;
  std::vector<RowMatrix> exogenous_features;  // per training trajectory
  double gamma = 0.0;
  double divergence_bound = 0.0;
};

/// The design must outlive the returned object.
PreparedDesign prepare_design(const ExperimentalDesign& design,
                              const ModelConfig& config);

FittedModel fit_prepared(const PreparedDesign& prepared, const ModelConfig& config);

FittedModel fit(const ExperimentalDesign& design, const ModelConfig& config);

struct SearchGrid {
  std::vector<std::size_t> degrees{1, 2, 3};
  std::vector<std::size_t> interactions{1, 2, 3};
  std::vector<double> qs{0.7, 0.85, 1.0};
  std::vector<double> nus;       // empty: the base config's ν
  std::vector<double> memories;  // seconds; empty: the base config's T
};

struct SearchEntry {
  BasisConfig basis;
  double nu = 0.0;
  double memory_s = 0.0;
  std::size_t n_regressors = 0;
  std::size_t n_nonzero = 0;
  std::size_t chosen_iteration = 0;
  double mean_nmse = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> same_as;  // identical basis to an earlier entry
  std::string error;                   // nonempty when the fit failed
};

struct SearchResult {
  FittedModel model;
  std::vector<SearchEntry> entries;
  std::size_t best = 0;
};

SearchResult adaptive_search(const ExperimentalDesign& design, const SearchGrid& grid,
                             const ModelConfig& base);

}  // namespace fnarx
