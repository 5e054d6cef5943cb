#include "fnarx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "fnarx/error.hpp"

namespace fnarx {

double nmse(std::span<const double> truth, std::span<const double> prediction,
            double gamma, std::size_t skip) {
  if (truth.size() != prediction.size()) {
    throw_invalid("nmse: truth has " + std::to_string(truth.size()) +
                  " samples, prediction " + std::to_string(prediction.size()));
  }
  if (skip >= truth.size()) throw_invalid("nmse: nothing left after skipping");
  if (gamma < 0.0) throw_invalid("nmse: gamma must be >= 0");
  const std::size_t n = truth.size() - skip;
  double mean = 0.0;
  for (std::size_t i = skip; i < truth.size(); ++i) mean += truth[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  double mse = 0.0;
  for (std::size_t i = skip; i < truth.size(); ++i) {
    const double d = truth[i] - mean;
    const double e = truth[i] - prediction[i];
    var += d * d;
    mse += e * e;
  }
  var /= static_cast<double>(n);
  mse /= static_cast<double>(n);
  if (!std::isfinite(mse) || !std::isfinite(var)) {
    return std::numeric_limits<double>::infinity();
  }
  const double den = var + gamma;
  if (den == 0.0) return mse == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return mse / den;
}

double mean_nmse(std::span<const double> errors) {
  if (errors.empty()) throw_invalid("mean_nmse of an empty set");
  double s = 0.0;
  for (double e : errors) s += e;
  return s / static_cast<double>(errors.size());
}

std::vector<double> survival_curve(std::span<const double> values,
                                   std::span<const double> thresholds) {
  if (values.empty()) throw_invalid("survival_curve needs at least one value");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(thresholds.size());
  const auto n = static_cast<double>(sorted.size());
  for (double t : thresholds) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    out.push_back(static_cast<double>(above) / n);
  }
  return out;
}

double peak_abs(std::span<const double> values, std::size_t skip) {
  double m = 0.0;
  for (std::size_t i = skip; i < values.size(); ++i) {
    const double a = std::abs(values[i]);
    if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
    m = std::max(m, a);
  }
  return m;
}

double peak_error(std::span<const double> truth, std::span<const double> prediction,
                  std::size_t skip) {
  if (truth.size() != prediction.size()) throw_invalid("peak_error: length mismatch");
  if (skip >= truth.size()) throw_invalid("peak_error: nothing left after skipping");
  const double pt = peak_abs(truth, skip);
  const double pp = peak_abs(prediction, skip);
  if (!std::isfinite(pp)) return std::numeric_limits<double>::infinity();
  if (pt == 0.0) return pp == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(pp - pt) / pt;
}

double median(std::vector<double> values) {
  if (values.empty()) throw_invalid("median of an empty set");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(
      values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

void ErrorReport::finalize() {
  const auto v = nmse_values();
  mean_nmse = fnarx::mean_nmse(v);
  median_nmse = median(v);
}

std::vector<double> ErrorReport::nmse_values() const {
  std::vector<double> v;
  for (const auto& t : trajectories) v.push_back(t.nmse);
  return v;
}

std::vector<double> ErrorReport::peak_truth_values() const {
  std::vector<double> v;
  for (const auto& t : trajectories) v.push_back(t.peak_truth);
  return v;
}

std::vector<double> ErrorReport::peak_prediction_values() const {
  std::vector<double> v;
  for (const auto& t : trajectories) v.push_back(t.peak_prediction);
  return v;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.precision(17);
  return out;
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

void write_report_csv(const ErrorReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "trajectory,nmse,peak_truth,peak_prediction,peak_error,diverged\n";
  for (std::size_t i = 0; i < report.trajectories.size(); ++i) {
    const auto& t = report.trajectories[i];
    out << i << ',' << t.nmse << ',' << t.peak_truth << ',' << t.peak_prediction << ','
        << t.peak_error << ',' << (t.diverged ? 1 : 0) << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

void write_report_json(const ErrorReport& report, const std::filesystem::path& path,
                       std::size_t n_thresholds) {
  nlohmann::json j;
  j["n_trajectories"] = report.trajectories.size();
  j["mean_nmse"] = finite_or_null(report.mean_nmse);
  j["median_nmse"] = finite_or_null(report.median_nmse);
  std::size_t diverged = 0;
  for (const auto& t : report.trajectories) diverged += t.diverged ? 1 : 0;
  j["n_diverged"] = diverged;

  if (!report.trajectories.empty() && n_thresholds > 1) {
    const auto truth = report.peak_truth_values();
    auto pred = report.peak_prediction_values();
    for (auto& p : pred) {
      if (!std::isfinite(p)) p = std::numeric_limits<double>::max();
    }
    const double hi = *std::max_element(truth.begin(), truth.end());
    std::vector<double> thresholds(n_thresholds);
    for (std::size_t k = 0; k < n_thresholds; ++k) {
      thresholds[k] = 1.5 * hi * static_cast<double>(k) / static_cast<double>(n_thresholds - 1);
    }
    j["survival"] = {{"threshold", thresholds},
                     {"truth", survival_curve(truth, thresholds)},
                     {"prediction", survival_curve(pred, thresholds)}};
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

}  // namespace fnarx
