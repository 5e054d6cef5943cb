#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "fnarx/timeseries.hpp"

namespace fnarx::test {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

inline std::vector<double> random_series(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// y(t+1) = a y(t) + b x(t) driven by white noise x, y(0) = 0.
inline Trajectory first_order_system(std::size_t n, std::uint64_t seed, double a = 0.9,
                                     double b = 0.1, double dt = 1.0) {
  auto x = random_series(n, seed);
  std::vector<double> y(n, 0.0);
  for (std::size_t t = 0; t + 1 < n; ++t) y[t + 1] = a * y[t] + b * x[t];
  SamplingGrid g;
  g.dt = dt;
  g.n_steps = n;
  return Trajectory(g, {{"x", x}}, Channel{"y", y});
}

inline ExperimentalDesign first_order_design(std::size_t count, std::size_t n,
                                             std::uint64_t seed) {
  std::vector<Trajectory> ts;
  for (std::size_t i = 0; i < count; ++i) ts.push_back(first_order_system(n, seed + i));
  return ExperimentalDesign(std::move(ts));
}

}  // namespace fnarx::test
