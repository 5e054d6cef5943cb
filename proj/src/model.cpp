#include "fnarx/model.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "fnarx/error.hpp"
#include "fnarx/metrics.hpp"
#include "omp_for.hpp"

namespace fnarx {

void ModelConfig::validate() const {
  if (!(memory_s > 0.0)) throw_invalid("memory_s must be positive");
  if (basis.degree < 1) throw_invalid("polynomial degree must be >= 1");
  if (basis.interaction < 1) throw_invalid("interaction order must be >= 1");
  if (!(basis.q > 0.0 && basis.q <= 1.0)) throw_invalid("q-norm must lie in (0, 1]");
  if (max_iters < 1) throw_invalid("max_iters must be >= 1");
  if (k_eval < 1) throw_invalid("k_eval must be >= 1");
  if (gamma && !(*gamma >= 0.0)) throw_invalid("gamma must be >= 0");
  if (!(divergence_factor > 0.0)) throw_invalid("divergence_factor must be positive");
  auto check = [](const ChannelSpec& s, bool is_output) {
    if (s.kind == TransformKind::kPca) s.truncation.validate();
    if (s.memory_s < 0.0) throw_invalid("channel memory_s must be >= 0");
    if (is_output) {
      for (auto l : s.lags) {
        if (l < 1) throw_invalid("output lags must be >= 1");
      }
    }
  };
  check(exogenous, false);
  check(output, true);
  for (std::size_t j = 0; j < channels.size(); ++j) check(channels[j], j + 1 == channels.size());
}

const ChannelSpec& ModelConfig::channel(std::size_t j, std::size_t n_exogenous) const {
  if (!channels.empty()) {
    if (channels.size() != n_exogenous + 1) {
      throw_invalid("config lists " + std::to_string(channels.size()) +
                    " channel specs, the design has " + std::to_string(n_exogenous + 1) +
                    " channels");
    }
    return channels.at(j);
  }
  return j < n_exogenous ? exogenous : output;
}

ModelConfig ModelConfig::classical(const LagSpec& lags, BasisConfig basis) {
  lags.validate();
  ModelConfig c;
  c.basis = basis;
  for (const auto& l : lags.exogenous_lags) {
    ChannelSpec s;
    s.kind = TransformKind::kIdentity;
    s.lags = l;
    c.channels.push_back(s);
  }
  ChannelSpec out;
  out.kind = TransformKind::kIdentity;
  out.lags = lags.output_lags;
  c.channels.push_back(out);
  c.exogenous.kind = TransformKind::kIdentity;
  c.output.kind = TransformKind::kIdentity;
  return c;
}

MemoryConfig resolve_memory(const ModelConfig& config, std::size_t n_exogenous,
                            double dt) {
  MemoryConfig mem;
  for (std::size_t j = 0; j <= n_exogenous; ++j) {
    const auto& s = config.channel(j, n_exogenous);
    const bool is_output = j == n_exogenous;
    std::size_t steps = 0;
    if (s.kind == TransformKind::kIdentity && !s.lags.empty()) {
      steps = *std::max_element(s.lags.begin(), s.lags.end());
      if (!is_output) steps = std::max<std::size_t>(steps, 1);
    } else {
      steps = MemoryConfig::steps_for(s.memory_s > 0.0 ? s.memory_s : config.memory_s, dt);
    }
    if (is_output) {
      mem.output_steps = steps;
    } else {
      mem.exogenous_steps.push_back(steps);
    }
  }
  mem.validate();
  return mem;
}

std::vector<std::size_t> FittedModel::feature_widths() const {
  std::vector<std::size_t> w;
  for (const auto& t : transforms) w.push_back(t.output_width());
  return w;
}

void FittedModel::validate() const {
  if (!(dt > 0.0)) throw_invalid("model dt must be positive");
  if (transforms.size() != exogenous_names.size() + 1) {
    throw_invalid("model has " + std::to_string(transforms.size()) +
                  " transforms for " + std::to_string(exogenous_names.size() + 1) +
                  " channels");
  }
  if (memory.exogenous_steps.size() != exogenous_names.size()) {
    throw_invalid("model memory does not match its channels");
  }
  std::size_t width = 0;
  for (std::size_t j = 0; j < transforms.size(); ++j) {
    if (transforms[j].input_width() != memory.width(j)) {
      throw_invalid("transform of channel '" + transforms[j].channel() +
                    "' does not match the window width");
    }
    width += transforms[j].output_width();
  }
  if (width != basis.dimension()) throw_invalid("basis dimension does not match features");
  if (static_cast<std::size_t>(coefficients.values.size()) != basis.size()) {
    throw_invalid("coefficient count does not match basis size");
  }
  for (auto a : coefficients.active) {
    if (a >= basis.size()) throw_invalid("active coefficient index out of range");
  }
}

namespace {

// Shared one-step kernel of forecast, OSA prediction and fit-time evaluation.
class StepKernel {
 public:
  struct Scratch {
    std::vector<double> xi;
    std::vector<double> values;
    MonomialScratch mono;
  };

  StepKernel(const std::vector<ChannelTransform>& transforms, const MultiIndexSet& basis,
             const SparseCoefficients& coef)
      : transforms_(transforms), basis_(basis) {
    for (std::size_t j = 0; j + 1 < transforms.size(); ++j) {
      n_exo_features_ += transforms[j].output_width();
    }
    for (auto a : coef.active) {
      terms_.push_back(a);
      coef_.push_back(coef.values(static_cast<Eigen::Index>(a)));
    }
  }

  Scratch scratch() const {
    Scratch s;
    s.xi.resize(basis_.dimension());
    s.values.resize(terms_.size());
    s.mono.prepare(basis_);
    return s;
  }

  // exo_row: precomputed exogenous features at t; y_prev points at y(t - 1).
  double step(const double* exo_row, const double* y_prev, Scratch& s) const {
    std::copy(exo_row, exo_row + n_exo_features_, s.xi.begin());
    transforms_.back().project(y_prev, -1, s.xi.data() + n_exo_features_);
    evaluate_terms(basis_, terms_, s.xi.data(), s.values.data(), s.mono);
    double acc = 0.0;
    for (std::size_t k = 0; k < terms_.size(); ++k) acc += coef_[k] * s.values[k];
    return acc;
  }

  std::size_t n_exo_features() const { return n_exo_features_; }

 private:
  const std::vector<ChannelTransform>& transforms_;
  const MultiIndexSet& basis_;
  std::vector<std::size_t> terms_;
  std::vector<double> coef_;
  std::size_t n_exo_features_ = 0;
};

RowMatrix exogenous_features(const std::vector<ChannelTransform>& transforms,
                             const MemoryConfig& mem, const Trajectory& traj) {
  const std::size_t m = mem.max_steps();
  const std::size_t n = traj.n_steps();
  std::size_t width = 0;
  for (std::size_t j = 0; j + 1 < transforms.size(); ++j) width += transforms[j].output_width();
  RowMatrix out(static_cast<Eigen::Index>(n - m), static_cast<Eigen::Index>(width));
  for (std::size_t t = m; t < n; ++t) {
    double* row = out.data() + static_cast<Eigen::Index>(t - m) * out.cols();
    for (std::size_t j = 0; j + 1 < transforms.size(); ++j) {
      transforms[j].project(traj.exogenous(j).values.data() + t, -1, row);
      row += transforms[j].output_width();
    }
  }
  return out;
}

// Runs the closed loop from t = m; buf[0, m) holds the initial outputs.
std::optional<std::size_t> closed_loop(const StepKernel& kernel, const RowMatrix& exo,
                                       std::size_t m, std::vector<double>& buf,
                                       double bound) {
  auto s = kernel.scratch();
  for (std::size_t t = m; t < buf.size(); ++t) {
    const double v = kernel.step(exo.data() + static_cast<Eigen::Index>(t - m) * exo.cols(),
                                 buf.data() + (t - 1), s);
    if (!std::isfinite(v) || std::abs(v) > bound) {
      std::fill(buf.begin() + static_cast<std::ptrdiff_t>(t), buf.end(),
                std::numeric_limits<double>::quiet_NaN());
      return t;
    }
    buf[t] = v;
  }
  return std::nullopt;
}

void check_trajectory(const FittedModel& model, const Trajectory& traj) {
  if (traj.exogenous_names() != model.exogenous_names) {
    throw_invalid("trajectory channels do not match the model's exogenous inputs");
  }
  if (std::abs(traj.dt() - model.dt) > 1e-9 * model.dt) {
    throw_invalid("trajectory dt " + std::to_string(traj.dt()) + " differs from model dt " +
                  std::to_string(model.dt));
  }
  if (traj.n_steps() <= model.memory.max_steps()) {
    throw_invalid("trajectory of " + std::to_string(traj.n_steps()) +
                  " steps is not longer than the model memory (" +
                  std::to_string(model.memory.max_steps()) + " steps)");
  }
}

double output_variance(const std::vector<double>& y, std::size_t skip) {
  double mean = 0.0;
  for (std::size_t i = skip; i < y.size(); ++i) mean += y[i];
  mean /= static_cast<double>(y.size() - skip);
  double var = 0.0;
  for (std::size_t i = skip; i < y.size(); ++i) var += (y[i] - mean) * (y[i] - mean);
  return var / static_cast<double>(y.size() - skip);
}

void score(ForecastResult& r, const Trajectory& traj, double gamma) {
  if (!traj.has_output()) return;
  if (r.diverged()) {
    r.nmse = std::numeric_limits<double>::infinity();
  } else {
    r.nmse = nmse(traj.output().values, r.prediction, gamma, r.init_span);
  }
}

}  // namespace

ForecastResult forecast(const FittedModel& model, const Trajectory& traj,
                        const std::vector<double>& init, const ForecastOptions& options) {
  check_trajectory(model, traj);
  const std::size_t m = model.memory.max_steps();
  if (init.size() < m) {
    throw_invalid("forecast init has " + std::to_string(init.size()) + " values, needs " +
                  std::to_string(m));
  }
  ForecastResult r;
  r.init_span = m;
  r.prediction.assign(traj.n_steps(), 0.0);
  std::copy(init.begin(), init.begin() + static_cast<std::ptrdiff_t>(m), r.prediction.begin());
  const StepKernel kernel(model.transforms, model.basis, model.coefficients);
  const auto exo = exogenous_features(model.transforms, model.memory, traj);
  r.diverged_at = closed_loop(kernel, exo, m, r.prediction, options.divergence_bound);
  score(r, traj, options.gamma);
  return r;
}

ForecastResult forecast(const FittedModel& model, const Trajectory& traj,
                        const ForecastOptions& options) {
  const std::size_t m = model.memory.max_steps();
  std::vector<double> init(m, 0.0);
  if (options.init == ForecastInit::kTruth) {
    const auto& y = traj.output().values;
    std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(std::min(m, y.size())),
              init.begin());
  }
  return forecast(model, traj, init, options);
}

ForecastResult predict_osa(const FittedModel& model, const Trajectory& traj, double gamma) {
  check_trajectory(model, traj);
  if (!traj.has_output()) throw_invalid("one-step-ahead prediction needs the true output");
  const std::size_t m = model.memory.max_steps();
  const auto& y = traj.output().values;
  ForecastResult r;
  r.init_span = m;
  r.prediction = y;
  const StepKernel kernel(model.transforms, model.basis, model.coefficients);
  const auto exo = exogenous_features(model.transforms, model.memory, traj);
  auto s = kernel.scratch();
  for (std::size_t t = m; t < y.size(); ++t) {
    const double v = kernel.step(exo.data() + static_cast<Eigen::Index>(t - m) * exo.cols(),
                                 y.data() + (t - 1), s);
    r.prediction[t] = v;
    if (!std::isfinite(v) && !r.diverged_at) r.diverged_at = t;
  }
  score(r, traj, gamma);
  return r;
}

std::vector<ForecastResult> forecast_design(const FittedModel& model,
                                            const ExperimentalDesign& design,
                                            const ForecastOptions& options) {
  std::vector<ForecastResult> out(design.size());
  detail::omp_for(design.size(),
                  [&](std::size_t i) { out[i] = forecast(model, design[i], options); });
  return out;
}

std::vector<ForecastResult> forecast_design_serial(const FittedModel& model,
                                                   const ExperimentalDesign& design,
                                                   const ForecastOptions& options) {
  std::vector<ForecastResult> out;
  out.reserve(design.size());
  for (const auto& traj : design) out.push_back(forecast(model, traj, options));
  return out;
}

PreparedDesign prepare_design(const ExperimentalDesign& design, const ModelConfig& config) {
  config.validate();
  if (!design.has_output()) throw_invalid("training trajectories need an output channel");
  const auto names = design.exogenous_names();
  const std::size_t n_exo = names.size();

  PreparedDesign prep;
  prep.design = &design;
  prep.memory = resolve_memory(config, n_exo, design.dt());
  prep.info = config.max_rows > 0
                  ? stack_design(design, prep.memory, config.max_rows, config.seed)
                  : stack_design(design, prep.memory);
  if (prep.info.rows() < 2) throw_invalid("training design yields fewer than 2 rows");

  prep.transforms.resize(n_exo + 1);
  detail::omp_for(n_exo + 1, [&](std::size_t j) {
    const auto& spec = config.channel(j, n_exo);
    const auto& name = prep.info.channel_names[j];
    auto& t = prep.transforms[j];
    t.kind = spec.kind;
    if (spec.kind == TransformKind::kPca) {
      t.pca = fit_pca(prep.info.blocks[j], spec.truncation, name);
      return;
    }
    const std::size_t width = prep.memory.width(j);
    std::vector<std::size_t> cols;
    if (spec.lags.empty()) {
      for (std::size_t c = 0; c < width; ++c) cols.push_back(c);
    } else {
      for (auto l : spec.lags) cols.push_back(j == n_exo ? l - 1 : l);
    }
    t.identity = make_identity(width, std::move(cols), name);
  });

  prep.features = compute_features(prep.transforms, prep.info);

  const std::size_t m = prep.memory.max_steps();
  prep.exogenous_features.resize(design.size());
  detail::omp_for(design.size(), [&](std::size_t i) {
    prep.exogenous_features[i] = exogenous_features(prep.transforms, prep.memory, design[i]);
  });

  double var_sum = 0.0;
  double peak = 0.0;
  for (const auto& traj : design) {
    const auto& y = traj.output().values;
    var_sum += output_variance(y, m);
    peak = std::max(peak, peak_abs(y));
  }
  prep.gamma = config.gamma ? *config.gamma
                            : 1e-8 * var_sum / static_cast<double>(design.size());
  prep.divergence_bound =
      peak > 0.0 ? config.divergence_factor * peak : std::numeric_limits<double>::infinity();
  return prep;
}

namespace {

double training_error(const PreparedDesign& prep, const ModelConfig& config,
                      const MultiIndexSet& basis, const SparseCoefficients& coef) {
  const auto& design = *prep.design;
  const std::size_t m = prep.memory.max_steps();
  const StepKernel kernel(prep.transforms, basis, coef);
  std::vector<double> errors(design.size());
  detail::omp_for(design.size(), [&](std::size_t i) {
    const auto& y = design[i].output().values;
    std::vector<double> buf(y.size(), 0.0);
    if (config.init == ForecastInit::kTruth) {
      std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m), buf.begin());
    }
    const auto bad = closed_loop(kernel, prep.exogenous_features[i], m, buf,
                                 prep.divergence_bound);
    errors[i] = bad ? std::numeric_limits<double>::infinity() : nmse(y, buf, prep.gamma, m);
  });
  return mean_nmse(errors);
}

}  // namespace

FittedModel fit_prepared(const PreparedDesign& prep, const ModelConfig& config) {
  config.validate();
  if (prep.design == nullptr) throw_invalid("prepared design is empty");
  const auto& design = *prep.design;
  const std::size_t dim = prep.features.width();
  if (dim == 0) throw_invalid("feature matrix has no columns");

  const auto basis = generate_multi_indices(
      dim, config.basis.degree, std::min(config.basis.interaction, dim), config.basis.q);
  const Eigen::MatrixXd psi = evaluate_regressors(basis, prep.features);
  const Eigen::VectorXd& y = prep.info.targets;
  const auto path = lars_path(psi, y, config.max_iters);

  FittedModel model;
  model.config = config;
  model.dt = design.dt();
  model.exogenous_names = design.exogenous_names();
  model.output_name = design.output_name();
  model.memory = prep.memory;
  model.transforms = prep.transforms;
  model.basis = basis;
  model.path_length = path.iterations();
  model.gamma = prep.gamma;
  model.training_trajectories = design.size();
  model.training_rows = prep.info.rows();
  model.exact_fit = path.exact_fit;
  model.degenerate_path = path.degenerate;

  if (path.iterations() == 0) {
    std::vector<std::size_t> cols;
    for (auto j : path.constant_columns) {
      if (psi.col(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff() > 0.0) {
        cols.push_back(j);
        break;
      }
    }
    if (cols.empty()) {
      model.coefficients.values = Eigen::VectorXd::Zero(psi.cols());
    } else {
      model.coefficients = ols_solve(psi, y, cols);
    }
    model.evaluations.push_back(
        {0, training_error(prep, config, basis, model.coefficients), model.n_nonzero()});
    return model;
  }

  std::vector<std::size_t> iterations;
  for (std::size_t k = config.k_eval; k <= path.iterations(); k += config.k_eval) {
    iterations.push_back(k);
  }
  if (iterations.empty() || iterations.back() != path.iterations()) {
    iterations.push_back(path.iterations());
  }

  const HybridRefitter refitter(path, psi, y);
  double best = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (auto k : iterations) {
    auto coef = refitter.refit(k);
    double err = training_error(prep, config, basis, coef);
    if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
    model.evaluations.push_back({k, err, coef.active.size()});
    if (!have_best || err < best) {
      best = err;
      have_best = true;
      model.chosen_iteration = k;
      model.coefficients = std::move(coef);
    }
  }
  return model;
}

FittedModel fit(const ExperimentalDesign& design, const ModelConfig& config) {
  const auto prep = prepare_design(design, config);
  return fit_prepared(prep, config);
}

namespace {

void set_nu(ModelConfig& c, double nu) {
  auto apply = [nu](ChannelSpec& s) {
    if (s.kind == TransformKind::kPca) {
      s.truncation.nu = nu;
      s.truncation.components = 0;
    }
  };
  apply(c.exogenous);
  apply(c.output);
  for (auto& s : c.channels) apply(s);
}

bool better(const SearchEntry& a, const SearchEntry& b) {
  return std::make_tuple(a.mean_nmse, a.n_nonzero, a.basis.degree) <
         std::make_tuple(b.mean_nmse, b.n_nonzero, b.basis.degree);
}

}  // namespace

SearchResult adaptive_search(const ExperimentalDesign& design, const SearchGrid& grid,
                             const ModelConfig& base) {
  if (grid.degrees.empty() || grid.interactions.empty() || grid.qs.empty()) {
    throw_invalid("search grid needs at least one degree, interaction order and q");
  }
  const std::vector<double> nus =
      grid.nus.empty() ? std::vector<double>{base.output.truncation.nu} : grid.nus;
  const std::vector<double> memories =
      grid.memories.empty() ? std::vector<double>{base.memory_s} : grid.memories;

  SearchResult result;
  std::optional<FittedModel> best_model;
  for (double memory : memories) {
    for (double nu : nus) {
      ModelConfig cfg = base;
      cfg.memory_s = memory;
      if (!grid.nus.empty()) set_nu(cfg, nu);

      std::optional<PreparedDesign> prep;
      std::string prep_error;
      try {
        prep = prepare_design(design, cfg);
      } catch (const Error& e) {
        prep_error = e.what();
      }
      std::vector<std::pair<MultiIndexSet, std::size_t>> seen;
      for (auto d : grid.degrees) {
        for (auto r : grid.interactions) {
          for (double q : grid.qs) {
            SearchEntry entry;
            entry.basis = {d, r, q};
            entry.nu = nu;
            entry.memory_s = memory;
            if (!prep) {
              entry.error = prep_error;
              result.entries.push_back(entry);
              continue;
            }
            try {
              const std::size_t dim = prep->features.width();
              entry.basis.interaction = std::min(r, dim);
              auto set = generate_multi_indices(dim, d, entry.basis.interaction, q);
              entry.n_regressors = set.size();
              auto dup = std::find_if(seen.begin(), seen.end(),
                                      [&](const auto& s) { return s.first == set; });
              if (dup != seen.end()) {
                const auto& prev = result.entries[dup->second];
                entry.same_as = dup->second;
                entry.n_nonzero = prev.n_nonzero;
                entry.chosen_iteration = prev.chosen_iteration;
                entry.mean_nmse = prev.mean_nmse;
                entry.error = prev.error;
                result.entries.push_back(entry);
                continue;
              }
              seen.emplace_back(std::move(set), result.entries.size());
              cfg.basis = entry.basis;
              auto model = fit_prepared(*prep, cfg);
              entry.n_nonzero = model.n_nonzero();
              entry.chosen_iteration = model.chosen_iteration;
              for (const auto& ev : model.evaluations) {
                if (ev.iteration == model.chosen_iteration) entry.mean_nmse = ev.mean_nmse;
              }
              if (!best_model || better(entry, result.entries[result.best])) {
                result.best = result.entries.size();
                best_model = std::move(model);
              }
            } catch (const Error& e) {
              entry.error = e.what();
            }
            result.entries.push_back(entry);
          }
        }
      }
    }
  }
  if (!best_model) throw Error(ErrorKind::kNumerical, "every search configuration failed");
  result.model = std::move(*best_model);
  return result;
}

}  // namespace fnarx
