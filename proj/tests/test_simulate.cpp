#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "fnarx/error.hpp"
#include "fnarx/simulate.hpp"

using namespace fnarx;
using std::numbers::pi;

namespace {

SamplingGrid grid(double dt, std::size_t n) { return SamplingGrid{dt, n, 0.0}; }

// Naive DFT power at bins 0..n/2.
std::vector<double> periodogram(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> p(n / 2 + 1, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * std::polar(1.0, -2.0 * pi * double(k * t % n) / double(n));
    }
    p[k] = std::norm(acc);
  }
  return p;
}

}  // namespace

TEST(Building, UniformChainFrequencies) {
  ShearBuildingParams p;
  const auto modes = modal_analysis(p);
  const double n = double(p.n_stories);
  const double base = std::sqrt(p.stiffness_per_story / p.mass_per_story);
  ASSERT_EQ(modes.frequencies.size(), p.n_stories);
  for (std::size_t j = 0; j < p.n_stories; ++j) {
    const double expected = 2.0 * base * std::sin((2.0 * double(j) + 1.0) * pi / (2.0 * (2.0 * n + 1.0)));
    EXPECT_NEAR(modes.frequencies[j], expected, 1e-9 * expected);
    EXPECT_NEAR(modes.periods[j], 2.0 * pi / expected, 1e-9 * modes.periods[j]);
  }
}

TEST(Building, ModeShapesMassOrthonormal) {
  ShearBuildingParams p;
  const auto modes = modal_analysis(p);
  const Eigen::MatrixXd g = modes.mode_shapes.transpose() * building_mass(p) * modes.mode_shapes;
  EXPECT_LT((g - Eigen::MatrixXd::Identity(8, 8)).norm(), 1e-9);
}

TEST(Building, RayleighDampingOnFirstTwoModes) {
  ShearBuildingParams p;
  const auto modes = modal_analysis(p);
  const Eigen::MatrixXd c = modes.mode_shapes.transpose() * building_damping(p) * modes.mode_shapes;
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(c(j, j) / (2.0 * modes.frequencies[j]), p.damping_ratio, 1e-10);
  }
}

// Single story under a unit step force: exact damped step response.
TEST(Building, SingleStoryStepResponse) {
  ShearBuildingParams p;
  p.n_stories = 1;
  p.output_story = 1;
  p.mass_per_story = 2.0;
  p.stiffness_per_story = 50.0;
  p.damping_ratio = 0.05;
  const double dt = 0.01;
  const std::size_t n = 1001;
  std::vector<std::vector<double>> f{std::vector<double>(n, 1.0)};
  const auto traj = simulate_building(p, f, grid(dt, n));
  const double w = std::sqrt(p.stiffness_per_story / p.mass_per_story);
  const double z = p.damping_ratio;
  const double wd = w * std::sqrt(1.0 - z * z);
  for (std::size_t k = 0; k < n; k += 37) {
    const double t = double(k) * dt;
    const double x = 1.0 / p.stiffness_per_story *
                     (1.0 - std::exp(-z * w * t) *
                                (std::cos(wd * t) + z / std::sqrt(1.0 - z * z) * std::sin(wd * t)));
    EXPECT_NEAR(traj.output().values[k], x, 1e-12) << "k=" << k;
  }
}

TEST(Building, ResponseIsLinear) {
  ShearBuildingParams p;
  ExcitationParams e;
  e.seed = 3;
  const auto g = grid(0.025, 801);
  auto f = generate_excitation(e, g, 8);
  const auto y1 = simulate_building(p, f, g).output().values;
  for (auto& ch : f) {
    for (auto& v : ch) v *= -2.5;
  }
  const auto y2 = simulate_building(p, f, g).output().values;
  double scale = 0.0;
  for (double v : y1) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 0; k < y1.size(); ++k) {
    EXPECT_NEAR(y2[k], -2.5 * y1[k], 1e-10 * 2.5 * scale);
  }
}

TEST(Building, ChannelsAndValidation) {
  ShearBuildingParams p;
  const auto g = grid(0.025, 11);
  std::vector<std::vector<double>> f(8, std::vector<double>(11, 0.0));
  const auto t = simulate_building(p, f, g);
  EXPECT_EQ(t.n_exogenous(), 8u);
  EXPECT_EQ(t.exogenous(0).name, "F1");
  EXPECT_EQ(t.output().name, "y");
  f.pop_back();
  EXPECT_THROW(simulate_building(p, f, g), Error);
  p.output_story = 9;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Excitation, DeterministicUnderSeed) {
  ExcitationParams e;
  e.seed = 11;
  const auto g = grid(0.025, 500);
  EXPECT_EQ(generate_excitation(e, g, 3), generate_excitation(e, g, 3));
  e.seed = 12;
  const auto other = generate_excitation(e, g, 3);
  e.seed = 11;
  EXPECT_NE(generate_excitation(e, g, 3), other);
}

// Averaged periodogram over 200 realizations: spectral peak below the corner
// and under 5 % of the power above it.
TEST(Excitation, BandLimitedSpectrum) {
  ExcitationParams e;
  e.corner_frequency = 1.0;
  const double dt = 0.025;
  const std::size_t n = 800;
  const auto g = grid(dt, n);
  std::vector<double> avg(n / 2 + 1, 0.0);
  for (std::uint64_t r = 0; r < 200; ++r) {
    e.seed = realization_seed(99, r);
    const auto x = generate_excitation(e, g, 1)[0];
    const auto p = periodogram(x);
    for (std::size_t k = 0; k < p.size(); ++k) avg[k] += p[k];
  }
  double total = 0.0, above = 0.0;
  std::size_t peak = 0;
  for (std::size_t k = 1; k < avg.size(); ++k) {
    const double f = double(k) / (double(n) * dt);
    total += avg[k];
    if (f > e.corner_frequency) above += avg[k];
    if (avg[k] > avg[peak]) peak = k;
  }
  EXPECT_LT(double(peak) / (double(n) * dt), e.corner_frequency);
  EXPECT_LT(above / total, 0.05);
}

TEST(Excitation, IntensityAndCoherence) {
  ExcitationParams e;
  e.intensity = 3.0;
  e.intensity_cov = 0.0;
  e.coherence = 1.0;
  e.seed = 5;
  const auto x = generate_excitation(e, grid(0.025, 20000), 2);
  double ss = 0.0;
  for (double v : x[0]) ss += v * v;
  EXPECT_NEAR(std::sqrt(ss / double(x[0].size())), 3.0, 0.5);
  EXPECT_EQ(x[0], x[1]);  // fully coherent channels coincide
}

TEST(Excitation, CornerSpreadIsCapped) {
  ExcitationParams e;
  e.corner_frequency = 5.0;
  e.corner_cov = 2.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    e.seed = s;
    const double c = realization_corner(e, 0.1);
    EXPECT_GT(c, 0.0);
    EXPECT_LE(c, 0.45 / 0.1);
  }
  e.corner_cov = 0.0;
  EXPECT_EQ(realization_corner(e, 0.001), 5.0);
  e.filter_order = 3;
  EXPECT_THROW(e.validate(), Error);
}

TEST(Oscillator, LinearFreeVibrationMatchesClosedForm) {
  OscillatorParams p;
  p.damping = 0.3;
  const double dt = 0.01;
  const std::size_t n = 1001;
  const auto s = integrate_oscillator(p, std::vector<double>(n, 0.0), grid(dt, n), 0.1, 0.0);
  const double w = std::sqrt(p.stiffness / p.mass);
  const double z = p.damping / (2.0 * p.mass * w);
  const double wd = w * std::sqrt(1.0 - z * z);
  for (std::size_t k = 0; k < n; k += 50) {
    const double t = double(k) * dt;
    const double x = 0.1 * std::exp(-z * w * t) * (std::cos(wd * t) + z * w / wd * std::sin(wd * t));
    EXPECT_NEAR(s.x[k], x, 1e-8);
  }
}

TEST(Oscillator, UndampedEnergyConserved) {
  OscillatorParams p;
  p.cubic_stiffness = 50.0;
  const std::size_t n = 2001;
  const auto s = integrate_oscillator(p, std::vector<double>(n, 0.0), grid(0.01, n), 0.5, 0.0);
  const double e0 = oscillator_energy(p, s.x.front(), s.v.front());
  const double e1 = oscillator_energy(p, s.x.back(), s.v.back());
  EXPECT_NEAR(e1, e0, 1e-6 * e0);
}

TEST(Oscillator, HardeningReducesPeak) {
  OscillatorParams lin, hard;
  hard.cubic_stiffness = 200.0;
  ExcitationParams e;
  e.intensity = 20.0;
  e.seed = 4;
  const auto g = grid(0.02, 1501);
  const auto f = generate_excitation(e, g, 1)[0];
  auto peak = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  EXPECT_LT(peak(simulate_oscillator(hard, f, g).output().values),
            peak(simulate_oscillator(lin, f, g).output().values));
}

TEST(Oscillator, IntegratedChannels) {
  OscillatorParams p;
  p.integrated_channels = true;
  const auto t = simulate_oscillator(p, std::vector<double>(11, 1.0), grid(0.1, 11));
  ASSERT_EQ(t.n_exogenous(), 3u);
  EXPECT_NEAR(t.exogenous(1).values[10], 1.0, 1e-12);   // ∫1 dt over 1 s
  EXPECT_NEAR(t.exogenous(2).values[10], 0.5, 1e-12);   // ∫∫1 dt²
}

TEST(Designs, SeedsAreDisjointAndDeterministic) {
  ShearBuildingParams b;
  ExcitationParams e;
  const auto g = grid(0.025, 200);
  const auto d1 = simulate_building_design(b, e, g, 3, 1);
  const auto d2 = simulate_building_design(b, e, g, 3, 1);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(d1[i].output().values, d2[i].output().values);
  }
  EXPECT_NE(d1[0].output().values, d1[1].output().values);
  EXPECT_NE(realization_seed(1, 0), realization_seed(1, 1));
  EXPECT_NE(realization_seed(1, 0), realization_seed(2, 0));
}
