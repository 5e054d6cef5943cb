#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace fnarx {

/// Mean squared error over [skip, n) divided by (population variance of the
/// truth over the same span + gamma). Non-finite input gives +inf.
double nmse(std::span<const double> truth, std::span<const double> prediction,
            double gamma = 0.0, std::size_t skip = 0);

double mean_nmse(std::span<const double> errors);

/// Empirical P(value > threshold) for each threshold.
std::vector<double> survival_curve(std::span<const double> values,
                                   std::span<const double> thresholds);

/// |max|pred| - max|truth|| / max|truth| over [skip, n).
double peak_error(std::span<const double> truth, std::span<const double> prediction,
                  std::size_t skip = 0);

double peak_abs(std::span<const double> values, std::size_t skip = 0);

double median(std::vector<double> values);

struct TrajectoryError {
  double nmse = 0.0;
  double peak_truth = 0.0;
  double peak_prediction = 0.0;
  double peak_error = 0.0;
  bool diverged = false;
};

struct ErrorReport {
  std::vector<TrajectoryError> trajectories;
  double mean_nmse = 0.0;
  double median_nmse = 0.0;

  void add(const TrajectoryError& e) { trajectories.push_back(e); }
  /// Recomputes mean_nmse and median_nmse from the entries.
  void finalize();
  std::vector<double> nmse_values() const;
  std::vector<double> peak_truth_values() const;
  std::vector<double> peak_prediction_values() const;
};

/// One row per trajectory.
void write_report_csv(const ErrorReport& report, const std::filesystem::path& path);
/// Summary plus exceedance curves of true and predicted peaks.
void write_report_json(const ErrorReport& report, const std::filesystem::path& path,
                       std::size_t n_thresholds = 50);

}  // namespace fnarx
