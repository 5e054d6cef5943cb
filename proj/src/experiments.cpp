#include "fnarx/experiments.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "fnarx/error.hpp"

namespace fnarx {

namespace {

SamplingGrid study_grid(double dt, double duration) {
  if (!(dt > 0.0) || !(duration > dt)) throw_invalid("study needs 0 < dt < duration");
  SamplingGrid g;
  g.dt = dt;
  g.n_steps = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
  return g;
}

}  // namespace

CaseStudy building_study(const BuildingStudyParams& p) {
  const auto grid = study_grid(p.dt, p.duration);
  return {simulate_building_design(p.building, p.excitation, grid, p.n_train,
                                   realization_seed(p.seed, 0)),
          simulate_building_design(p.building, p.excitation, grid, p.n_validation,
                                   realization_seed(p.seed, 1))};
}

CaseStudy oscillator_study(const OscillatorStudyParams& p) {
  const auto grid = study_grid(p.dt, p.duration);
  return {simulate_oscillator_design(p.oscillator, p.excitation, grid, p.n_train,
                                     realization_seed(p.seed, 0)),
          simulate_oscillator_design(p.oscillator, p.excitation, grid, p.n_validation,
                                     realization_seed(p.seed, 1))};
}

ErrorReport evaluate_design(const FittedModel& model, const ExperimentalDesign& design,
                            const ForecastOptions& options) {
  if (!design.has_output()) throw_invalid("evaluation needs trajectories with outputs");
  const auto results = forecast_design(model, design, options);
  ErrorReport report;
  for (std::size_t i = 0; i < design.size(); ++i) {
    const auto& r = results[i];
    const auto& y = design[i].output().values;
    TrajectoryError e;
    e.nmse = r.nmse.value_or(std::numeric_limits<double>::infinity());
    e.diverged = r.diverged();
    e.peak_truth = peak_abs(y, r.init_span);
    e.peak_prediction = e.diverged ? std::numeric_limits<double>::infinity()
                                   : peak_abs(r.prediction, r.init_span);
    e.peak_error = e.diverged ? std::numeric_limits<double>::infinity()
                              : peak_error(y, r.prediction, r.init_span);
    report.add(e);
  }
  report.finalize();
  return report;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "n_ed") return SweepAxis::kDesignSize;
  if (name == "nu") return SweepAxis::kExplainedVariance;
  if (name == "memory") return SweepAxis::kMemory;
  if (name == "dt") return SweepAxis::kTimeStep;
  throw_invalid("unknown sweep axis \"" + name + "\" (expected n_ed, nu, memory or dt)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kDesignSize:
      return "n_ed";
    case SweepAxis::kExplainedVariance:
      return "nu";
    case SweepAxis::kMemory:
      return "memory";
    case SweepAxis::kTimeStep:
      return "dt";
  }
  return "unknown";
}

std::vector<SweepRow> run_sweep(const CaseStudy& study, const ModelConfig& base,
                                SweepAxis axis, const std::vector<double>& values,
                                const ForecastOptions& options) {
  if (values.empty()) throw_invalid("sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (double v : values) {
    ModelConfig cfg = base;
    const ExperimentalDesign* train = &study.train;
    const ExperimentalDesign* validation = &study.validation;
    std::optional<ExperimentalDesign> train_owned, validation_owned;
    switch (axis) {
      case SweepAxis::kDesignSize: {
        const auto n = static_cast<std::size_t>(std::llround(v));
        if (n < 1 || n > study.train.size()) {
          throw_invalid("design size " + std::to_string(n) + " outside [1, " +
                        std::to_string(study.train.size()) + "]");
        }
        train_owned = study.train.head(n);
        train = &*train_owned;
        break;
      }
      case SweepAxis::kExplainedVariance:
        for (auto* s : {&cfg.exogenous, &cfg.output}) {
          s->truncation.nu = v;
          s->truncation.components = 0;
        }
        for (auto& s : cfg.channels) {
          s.truncation.nu = v;
          s.truncation.components = 0;
        }
        break;
      case SweepAxis::kMemory:
        cfg.memory_s = v;
        break;
      case SweepAxis::kTimeStep:
        train_owned = resample(study.train, v);
        validation_owned = resample(study.validation, v);
        train = &*train_owned;
        validation = &*validation_owned;
        break;
    }
    const auto model = fit(*train, cfg);
    const auto report = evaluate_design(model, *validation, options);
    SweepRow row;
    row.value = v;
    row.n_features = model.n_features();
    row.n_regressors = model.basis.size();
    row.n_nonzero = model.n_nonzero();
    row.chosen_iteration = model.chosen_iteration;
    for (const auto& e : model.evaluations) {
      if (e.iteration == model.chosen_iteration) row.train_nmse = e.mean_nmse;
    }
    row.median_nmse = report.median_nmse;
    row.mean_nmse = report.mean_nmse;
    for (const auto& t : report.trajectories) row.n_diverged += t.diverged ? 1 : 0;
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, SweepAxis axis,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out.precision(17);
  out << to_string(axis)
      << ",n_features,n_regressors,n_nonzero,chosen_iteration,train_nmse,median_nmse,"
         "mean_nmse,n_diverged\n";
  for (const auto& r : rows) {
    out << r.value << ',' << r.n_features << ',' << r.n_regressors << ',' << r.n_nonzero
        << ',' << r.chosen_iteration << ',' << r.train_nmse << ',' << r.median_nmse << ','
        << r.mean_nmse << ',' << r.n_diverged << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
}

}  // namespace fnarx
