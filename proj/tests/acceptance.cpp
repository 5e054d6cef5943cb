// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every criterion is run even when an earlier one fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fnarx/error.hpp"
#include "fnarx/experiments.hpp"
#include "fnarx/features.hpp"
#include "fnarx/metrics.hpp"
#include "fnarx/model.hpp"
#include "fnarx/model_io.hpp"
#include "fnarx/regression.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fnarx;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

int failures = 0;

void run(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (dt > budget_s) {
    o.pass = false;
    o.detail += fmt("; exceeded %.0f s budget", budget_s);
  }
  if (!o.pass) ++failures;
  std::printf("%s  %2d  %-44s %8.1f s  %s\n", o.pass ? "PASS" : "FAIL", id, name, dt,
              o.detail.c_str());
  std::fflush(stdout);
}

std::string series(const std::vector<SweepRow>& rows) {
  std::ostringstream s;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s << (i ? ", " : "") << rows[i].value << ": " << fmt("%.4g", rows[i].median_nmse);
  }
  return s.str();
}

// Building analogue shared by the trend criteria.
BuildingStudyParams building_params(std::uint64_t seed) {
  BuildingStudyParams p;
  p.n_train = 100;
  p.n_validation = 200;
  p.duration = 60.0;
  p.seed = seed;
  p.excitation.filter_order = 8;
  p.excitation.corner_frequency = 3.0;
  p.excitation.corner_cov = 0.3;
  return p;
}

ModelConfig building_model() {
  ModelConfig c;
  c.memory_s = 5.0;
  c.exogenous.truncation.nu = 0.95;
  c.output.truncation.nu = 0.95;
  c.max_rows = 20000;
  c.k_eval = 10;
  return c;
}

constexpr std::uint64_t kBuildingSeed = 1;

// ---------------------------------------------------------------------------

Outcome linear_recovery() {
  const auto design = test::first_order_design(3, 400, 10);
  LagSpec lags;
  lags.exogenous_lags = {{0, 1}};
  lags.output_lags = {1};
  const auto m = fit(design, ModelConfig::classical(lags));
  // Basis: 1, x(t), x(t-1), y(t-1).
  const Eigen::Vector4d expected(0.0, 0.0, 0.1, 0.9);
  const double coef_err = (m.coefficients.values - expected).cwiseAbs().maxCoeff();
  const auto val = test::first_order_system(10000, 999);
  const auto r = forecast(m, val);
  const double e = r.nmse.value_or(std::numeric_limits<double>::infinity());
  return {coef_err <= 1e-8 && e < 1e-12,
          fmt("max coefficient error %.2e, forecast NMSE %.2e over 1e4 steps", coef_err, e)};
}

Outcome lars_oracle() {
  std::size_t breakpoints = 0, compared = 0, beyond_drop = 0, mismatches = 0;
  double refit_err = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Eigen::MatrixXd psi = test::random_matrix(30, 10, 100 + s);
    const Eigen::VectorXd y = psi * test::random_matrix(10, 1, 200 + s).col(0) +
                              0.5 * test::random_matrix(30, 1, 300 + s).col(0);
    const auto path = lars_path(psi, y, 100);
    const auto st = test::standardize(psi, y);
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(10);
    bool dropped = false;
    for (std::size_t k = 1; k < path.iterations(); ++k) {
      ++breakpoints;
      const Eigen::VectorXd& b = path.coefficients[k - 1];
      const Eigen::VectorXd c = st.x.transpose() * (st.y - st.x * b);
      // Past the first sign change the lasso path drops a variable and the
      // two paths no longer share breakpoints.
      for (auto j : path.active(k)) {
        dropped |= (b(Eigen::Index(j)) > 0) != (c(Eigen::Index(j)) > 0);
      }
      if (dropped) {
        ++beyond_drop;
        continue;
      }
      warm = test::lasso_cd(st.x, st.y, path.entry_correlations[k], warm);
      std::set<std::size_t> support;
      for (Eigen::Index j = 0; j < 10; ++j) {
        if (std::abs(warm(j)) > 1e-9) support.insert(std::size_t(j));
      }
      const auto act = path.active(k);
      ++compared;
      if (support != std::set<std::size_t>(act.begin(), act.end()) ||
          (warm - b).norm() > 1e-8 * (1.0 + b.norm())) {
        ++mismatches;
      }
    }

    const Eigen::MatrixXd psi1 = test::with_intercept(psi);
    const auto path1 = lars_path(psi1, y, 100);
    for (std::size_t k = 1; k <= path1.iterations(); ++k) {
      auto cols = path1.active(k);
      cols.insert(cols.begin(), 0);
      Eigen::MatrixXd a(30, Eigen::Index(cols.size()));
      for (std::size_t i = 0; i < cols.size(); ++i) a.col(Eigen::Index(i)) = psi1.col(Eigen::Index(cols[i]));
      const Eigen::VectorXd oracle = test::normal_equations(a, y);
      const auto h = hybrid_refit(path1, psi1, y, k);
      for (std::size_t i = 0; i < cols.size(); ++i) {
        const double o = oracle(Eigen::Index(i));
        refit_err = std::max(refit_err, std::abs(h.values(Eigen::Index(cols[i])) - o) / (1.0 + std::abs(o)));
      }
    }
  }
  const bool pass = mismatches == 0 && compared > 0 && refit_err <= 1e-8;
  return {pass, fmt("%zu/%zu breakpoints match the lasso oracle (%zu past a lasso drop), "
                    "refit error %.1e",
                    compared - mismatches, compared, beyond_drop, refit_err)};
}

Outcome pca_invariants() {
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Eigen::Index rows = 60 + Eigen::Index(s % 7) * 70;
    const Eigen::Index cols = 2 + Eigen::Index(s % 11);
    Eigen::MatrixXd x = test::random_matrix(rows, cols, 500 + s) * test::random_matrix(cols, cols, 501 + s);
    for (Eigen::Index j = 0; j < cols; ++j) x.col(j) = x.col(j) * (1.0 + double(j)) + Eigen::VectorXd::Constant(rows, 3.0 * double(j));
    const auto t = fit_pca(x, Truncation{0.95, std::size_t(cols)});
    const Eigen::MatrixXd l(t.components);

    Eigen::MatrixXd z = x.rowwise() - x.colwise().mean();
    for (Eigen::Index j = 0; j < cols; ++j) z.col(j) /= std::sqrt(z.col(j).squaredNorm() / double(rows - 1));
    const double trace = (z.transpose() * z).trace() / double(rows - 1);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(z / std::sqrt(double(rows - 1)));

    double err = (l.transpose() * l - Eigen::MatrixXd::Identity(cols, cols)).norm();
    double sum = 0.0;
    for (Eigen::Index k = 0; k < cols; ++k) {
      const double ev = t.eigenvalues[std::size_t(k)];
      const double sv = svd.singularValues()(k);
      err = std::max(err, std::abs(ev - sv * sv) / trace);
      if (k > 0 && ev > t.eigenvalues[std::size_t(k - 1)]) err = 1.0;
      sum += ev;
    }
    err = std::max(err, std::abs(sum - trace) / trace);
    err = std::max(err, (z * l * l.transpose() - z).norm() / z.norm());
    err = std::max(err, (apply(t, x) - z * l).norm() / z.norm());
    worst = std::max(worst, err);
    bad += err > 1e-8;
  }
  return {bad == 0, fmt("%zu/100 blocks within 1e-8, worst deviation %.1e", 100 - bad, worst)};
}

struct BuildingRun {
  std::optional<CaseStudy> study;
  double fnarx_at_40 = std::numeric_limits<double>::quiet_NaN();
};

Outcome design_size_trend(BuildingRun& shared) {
  shared.study = building_study(building_params(kBuildingSeed));
  const auto rows = run_sweep(*shared.study, building_model(), SweepAxis::kDesignSize, {1, 10, 40});
  shared.fnarx_at_40 = rows[2].median_nmse;
  const bool pass = rows[0].median_nmse > rows[1].median_nmse &&
                    rows[1].median_nmse > rows[2].median_nmse;
  return {pass, "median NMSE by N_ED {" + series(rows) + "}"};
}

Outcome narx_baseline(const BuildingRun& shared) {
  if (!shared.study) return {false, "building study unavailable"};
  auto cfg = ModelConfig::classical(LagSpec::full(shared.study->train[0].n_exogenous(), 15, 15));
  cfg.max_rows = building_model().max_rows;
  cfg.k_eval = building_model().k_eval;
  const auto rows = run_sweep(*shared.study, cfg, SweepAxis::kDesignSize, {40});
  const double narx = rows[0].median_nmse;
  const double ratio = shared.fnarx_at_40 / narx;
  return {ratio <= 0.2, fmt("F-NARX %.4g vs NARX-15 %.4g (ratio %.3f, limit 0.2)",
                           shared.fnarx_at_40, narx, ratio)};
}

Outcome sampling_rate(const BuildingRun& shared) {
  if (!shared.study) return {false, "building study unavailable"};
  const CaseStudy s{shared.study->train.head(40), shared.study->validation.head(100)};
  const double dt = s.train.dt();
  const auto rows = run_sweep(s, building_model(), SweepAxis::kTimeStep,
                              {dt, dt / 2.0, dt / 4.0, dt * 8.0});
  const double native = rows[0].median_nmse;
  const bool pass = rows[1].median_nmse <= 2.0 * native && rows[2].median_nmse <= 2.0 * native &&
                    rows[3].median_nmse > native;
  return {pass, "median NMSE by dt {" + series(rows) + "}"};
}

Outcome variance_sweep() {
  int interior = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto p = building_params(seed);
    p.n_train = 40;
    const auto study = building_study(p);
    const auto rows = run_sweep(study, building_model(), SweepAxis::kExplainedVariance,
                                {0.85, 0.95, 0.99, 0.999});
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].median_nmse < rows[best].median_nmse) best = i;
    }
    const bool in = best != 0 && best + 1 != rows.size();
    interior += in;
    detail += fmt("%sseed %d best %.3g%s", seed > 1 ? "; " : "", int(seed), rows[best].value,
                  in ? "" : " (edge)");
  }
  return {interior >= 4, fmt("%d/5 interior: ", interior) + detail};
}

Outcome duffing() {
  OscillatorStudyParams p;
  p.n_train = 100;
  p.n_validation = 200;
  p.seed = 1;
  p.oscillator.damping = 0.628;
  p.oscillator.cubic_stiffness = 10.0;
  p.excitation.filter_order = 8;
  p.excitation.corner_frequency = 2.0;
  p.excitation.intensity = 10.0;
  const auto study = oscillator_study(p);
  ModelConfig c;
  c.memory_s = 2.0;
  c.exogenous.truncation.nu = 0.99;
  c.output.truncation.nu = 0.99;
  c.max_rows = 20000;
  c.k_eval = 10;
  const auto search = adaptive_search(study.train, SearchGrid{}, c);
  const auto report = evaluate_design(search.model, study.validation);
  std::size_t within = 0;
  for (const auto& t : report.trajectories) {
    within += !t.diverged && std::abs(t.peak_prediction - t.peak_truth) <= 0.2 * t.peak_truth;
  }
  const double share = double(within) / double(report.trajectories.size());
  const auto& b = search.model.config.basis;
  return {b.degree >= 3 && share >= 0.9,
          fmt("selected d=%zu r=%zu q=%.2f; %zu/%zu peaks within 20%% (median NMSE %.3g)",
              b.degree, b.interaction, b.q, within, report.trajectories.size(),
              report.median_nmse)};
}

Outcome metric_definitions() {
  const auto y = test::random_series(500, 1);
  double mu = 0.0;
  for (double v : y) mu += v;
  mu /= double(y.size());
  const double mean_pred = nmse(y, std::vector<double>(y.size(), mu), 0.0);

  auto v = test::random_series(301, 4);
  v.push_back(v[7]);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const std::vector<double> thresholds{-10.0, -1.0, 0.0, v[7], 0.5, 2.0, 10.0};
  const auto curve = survival_curve(v, thresholds);
  double surv_err = 0.0;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    std::size_t above = 0;
    for (double s : sorted) above += s > thresholds[i];
    surv_err = std::max(surv_err, std::abs(curve[i] - double(above) / double(sorted.size())));
  }

  std::vector<double> errs;
  double direct = 0.0;
  for (std::uint64_t s = 0; s < 12; ++s) {
    const auto t = test::random_series(80, 10 + s);
    auto p = t;
    const auto noise = test::random_series(80, 50 + s);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += 0.1 * double(s) * noise[k];
    errs.push_back(nmse(t, p));
    double m = 0.0;
    for (double x : t) m += x;
    m /= 80.0;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < 80; ++k) {
      num += (t[k] - p[k]) * (t[k] - p[k]);
      den += (t[k] - m) * (t[k] - m);
    }
    direct += num / den / 12.0;
  }
  const double mean_err = std::abs(mean_nmse(errs) - direct);
  return {std::abs(mean_pred - 1.0) < 1e-12 && surv_err == 0.0 && mean_err < 1e-12,
          fmt("nmse(mean)-1 = %.1e, survival deviation %.1e, mean_nmse deviation %.1e",
              mean_pred - 1.0, surv_err, mean_err)};
}

Outcome serialization() {
  BuildingStudyParams p;
  p.n_train = 5;
  p.n_validation = 10;
  p.duration = 20.0;
  p.seed = 42;
  const auto study = building_study(p);
  ModelConfig c;
  c.basis = {2, 2, 0.85};
  c.max_iters = 40;
  const auto m = fit(study.train, c);
  const auto path = std::filesystem::temp_directory_path() / "fnarx_acceptance_model.json";
  save_model(m, path);
  const auto back = load_model(path);
  std::size_t identical = 0;
  for (const auto& t : study.validation) {
    identical += forecast(back, t).prediction == forecast(m, t).prediction;
  }
  std::filesystem::remove(path);
  return {identical == study.validation.size(),
          fmt("%zu/%zu forecasts bitwise identical after reload", identical, study.validation.size())};
}

}  // namespace

int main() {
  BuildingRun shared;
  run(1, "exact linear-system recovery", 5, linear_recovery);
  run(2, "LARS vs lasso oracle, hybrid refit", 10, lars_oracle);
  run(3, "PCA invariants on 100 blocks", 10, pca_invariants);
  run(4, "error decreases with design size", 300, [&] { return design_size_trend(shared); });
  run(5, "F-NARX vs order-15 NARX", 300, [&] { return narx_baseline(shared); });
  run(6, "sampling-rate robustness", 600, [&] { return sampling_rate(shared); });
  run(7, "explained-variance sweep is interior", 600, variance_sweep);
  run(8, "Duffing oscillator search and peaks", 900, duffing);
  run(9, "metric definitions", 1, metric_definitions);
  run(10, "model serialization round trip", 5, serialization);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
