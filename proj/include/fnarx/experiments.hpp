#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fnarx/metrics.hpp"
#include "fnarx/model.hpp"
#include "fnarx/simulate.hpp"
#include "fnarx/timeseries.hpp"

namespace fnarx {

struct CaseStudy {
  ExperimentalDesign train;
  ExperimentalDesign validation;
};

struct BuildingStudyParams {
  ShearBuildingParams building;
  ExcitationParams excitation;
  double dt = 0.025;
  double duration = 60.0;
  std::size_t n_train = 100;
  std::size_t n_validation = 200;
  std::uint64_t seed = 1;
};

struct OscillatorStudyParams {
  OscillatorParams oscillator;
  ExcitationParams excitation;
  double dt = 0.02;
  double duration = 30.0;
  std::size_t n_train = 100;
  std::size_t n_validation = 200;
  std::uint64_t seed = 1;
};

/// Training and validation realizations drawn from disjoint seed streams.
CaseStudy building_study(const BuildingStudyParams& p);
CaseStudy oscillator_study(const OscillatorStudyParams& p);

/// Forecast every trajectory and collect NMSE and peak metrics after the
/// initialization span.
ErrorReport evaluate_design(const FittedModel& model, const ExperimentalDesign& design,
                            const ForecastOptions& options = {});

enum class SweepAxis { kDesignSize, kExplainedVariance, kMemory, kTimeStep };

SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepRow {
  double value = 0.0;
  std::size_t n_features = 0;
  std::size_t n_regressors = 0;
  std::size_t n_nonzero = 0;
  std::size_t chosen_iteration = 0;
  double train_nmse = 0.0;
  double median_nmse = 0.0;
  double mean_nmse = 0.0;
  std::size_t n_diverged = 0;
};

/// Fits one model per axis value and validates it. Time-step values resample
/// both designs by an integer ratio; design sizes take the first n training
/// trajectories.
std::vector<SweepRow> run_sweep(const CaseStudy& study, const ModelConfig& base,
                                SweepAxis axis, const std::vector<double>& values,
                                const ForecastOptions& options = {});

void write_sweep_csv(const std::vector<SweepRow>& rows, SweepAxis axis,
                     const std::string& path);

}  // namespace fnarx
