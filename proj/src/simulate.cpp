#include "fnarx/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "fnarx/error.hpp"
#include "omp_for.hpp"

namespace fnarx {

namespace {

using std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Second-order low-pass section (bilinear transform, prewarped at f0).
struct Biquad {
  double b0, b1, b2, a1, a2;
  double z1 = 0.0, z2 = 0.0;

  double step(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

std::vector<Biquad> butterworth_lowpass(double fc, double fs, int order) {
  const double w0 = 2.0 * pi * fc / fs;
  const double cw = std::cos(w0);
  const double sw = std::sin(w0);
  std::vector<Biquad> sections;
  for (int k = 1; k <= order / 2; ++k) {
    const double q =
        1.0 / (2.0 * std::cos(pi * (2.0 * k - 1.0) / (2.0 * order)));
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad s{};
    s.b0 = (1.0 - cw) / 2.0 / a0;
    s.b1 = (1.0 - cw) / a0;
    s.b2 = s.b0;
    s.a1 = -2.0 * cw / a0;
    s.a2 = (1.0 - alpha) / a0;
    sections.push_back(s);
  }
  return sections;
}

// RMS gain of the cascade for unit white noise: sqrt(sum h[n]^2).
double noise_gain(std::vector<Biquad> sections, std::size_t length) {
  double energy = 0.0;
  for (std::size_t n = 0; n < length; ++n) {
    double v = n == 0 ? 1.0 : 0.0;
    for (auto& s : sections) v = s.step(v);
    energy += v * v;
  }
  return std::sqrt(energy);
}

double restoring_force(const OscillatorParams& p, double x) {
  const double linear =
      p.saturation > 0.0 ? p.saturation * std::tanh(x / p.saturation) : x;
  return p.stiffness * linear + p.cubic_stiffness * x * x * x;
}

}  // namespace

void ShearBuildingParams::validate() const {
  if (n_stories < 1) throw_invalid("building needs at least one story");
  if (!(mass_per_story > 0.0) || !(stiffness_per_story > 0.0)) {
    throw_invalid("building mass and stiffness must be positive");
  }
  if (!(damping_ratio > 0.0 && damping_ratio < 1.0)) {
    throw_invalid("building damping_ratio must be in (0, 1)");
  }
  if (output_story < 1 || output_story > n_stories) {
    throw_invalid("building output_story must be in [1, n_stories]");
  }
}

void ExcitationParams::validate() const {
  if (!(corner_frequency > 0.0)) throw_invalid("corner_frequency must be > 0");
  if (filter_order < 2 || filter_order % 2 != 0) {
    throw_invalid("filter_order must be a positive even number");
  }
  if (!(intensity > 0.0)) throw_invalid("excitation intensity must be > 0");
  if (!(intensity_cov >= 0.0)) throw_invalid("intensity_cov must be >= 0");
  if (!(corner_cov >= 0.0)) throw_invalid("corner_cov must be >= 0");
  if (!(coherence >= 0.0 && coherence <= 1.0)) {
    throw_invalid("coherence must be in [0, 1]");
  }
  if (kind == ExcitationKind::kHarmonicPlusNoise) {
    if (!(harmonic_frequency > 0.0)) {
      throw_invalid("harmonic_frequency must be > 0");
    }
    if (!(harmonic_fraction >= 0.0 && harmonic_fraction <= 1.0)) {
      throw_invalid("harmonic_fraction must be in [0, 1]");
    }
  }
}

void OscillatorParams::validate() const {
  if (!(mass > 0.0)) throw_invalid("oscillator mass must be > 0");
  if (!(damping >= 0.0)) throw_invalid("oscillator damping must be >= 0");
  if (!(saturation >= 0.0)) throw_invalid("oscillator saturation must be >= 0");
  if (substeps < 1) throw_invalid("oscillator substeps must be >= 1");
}

Eigen::MatrixXd building_mass(const ShearBuildingParams& p) {
  p.validate();
  const auto n = static_cast<Eigen::Index>(p.n_stories);
  return Eigen::MatrixXd::Identity(n, n) * p.mass_per_story;
}

Eigen::MatrixXd building_stiffness(const ShearBuildingParams& p) {
  p.validate();
  const auto n = static_cast<Eigen::Index>(p.n_stories);
  const double k = p.stiffness_per_story;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  // Story j joins floor j to floor j-1 (the ground for j = 0).
  for (Eigen::Index j = 0; j < n; ++j) {
    K(j, j) += k;
    if (j > 0) {
      K(j - 1, j - 1) += k;
      K(j - 1, j) -= k;
      K(j, j - 1) -= k;
    }
  }
  return K;
}

ModalResult modal_analysis(const ShearBuildingParams& p) {
  const Eigen::MatrixXd M = building_mass(p);
  const Eigen::MatrixXd K = building_stiffness(p);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumerical, "modal analysis failed to converge");
  }
  ModalResult out;
  out.mode_shapes = es.eigenvectors();  // ascending eigenvalues
  for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
    const double w = std::sqrt(std::max(es.eigenvalues()(j), 0.0));
    out.frequencies.push_back(w);
    out.periods.push_back(2.0 * pi / w);
    auto col = out.mode_shapes.col(j);
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0.0) col = -col;
  }
  return out;
}

Eigen::MatrixXd building_damping(const ShearBuildingParams& p) {
  const auto modes = modal_analysis(p);
  const double w1 = modes.frequencies[0];
  const double w2 = modes.frequencies.size() > 1 ? modes.frequencies[1] : w1;
  const double a0 = 2.0 * p.damping_ratio * w1 * w2 / (w1 + w2);
  const double a1 = 2.0 * p.damping_ratio / (w1 + w2);
  return a0 * building_mass(p) + a1 * building_stiffness(p);
}

DiscreteBuilding discretize_building(const ShearBuildingParams& p, double dt) {
  if (!(dt > 0.0)) throw_invalid("discretization dt must be > 0");
  const auto n = static_cast<Eigen::Index>(p.n_stories);
  const Eigen::MatrixXd M = building_mass(p);
  const Eigen::MatrixXd Minv = M.inverse();
  const Eigen::MatrixXd K = building_stiffness(p);
  const Eigen::MatrixXd C = building_damping(p);

  // [A B; 0 0] dt, exponentiated, holds [Ad Bd; 0 I].
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  aug.block(0, n, n, n).setIdentity();
  aug.block(n, 0, n, n) = -Minv * K;
  aug.block(n, n, n, n) = -Minv * C;
  aug.block(n, 2 * n, n, n) = Minv;
  const Eigen::MatrixXd phi = (aug * dt).exp();

  DiscreteBuilding sys;
  sys.Ad = phi.block(0, 0, 2 * n, 2 * n);
  sys.Bd = phi.block(0, 2 * n, 2 * n, n);
  sys.output_index = p.output_story - 1;
  sys.dt = dt;
  return sys;
}

Trajectory simulate_building(const DiscreteBuilding& sys,
                             const std::vector<std::vector<double>>& forces,
                             const SamplingGrid& grid,
                             const Eigen::VectorXd& initial_state) {
  grid.validate();
  const auto n_states = sys.Ad.rows();
  const auto n_inputs = static_cast<std::size_t>(sys.Bd.cols());
  if (forces.size() != n_inputs) {
    throw_invalid("simulate_building: expected " + std::to_string(n_inputs) +
                  " force channels, got " + std::to_string(forces.size()));
  }
  if (std::abs(grid.dt - sys.dt) > 1e-12 * sys.dt) {
    throw_invalid("simulate_building: grid dt differs from discretization dt");
  }
  for (const auto& f : forces) {
    if (f.size() != grid.n_steps) {
      throw_invalid("simulate_building: force length differs from grid");
    }
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n_states);
  if (initial_state.size() != 0) {
    if (initial_state.size() != n_states) {
      throw_invalid("simulate_building: initial state has wrong size");
    }
    z = initial_state;
  }

  std::vector<double> y(grid.n_steps);
  Eigen::VectorXd u(static_cast<Eigen::Index>(n_inputs));
  Eigen::VectorXd next(n_states);
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    y[k] = z(static_cast<Eigen::Index>(sys.output_index));
    if (!std::isfinite(y[k])) {
      throw Error(ErrorKind::kNumerical,
                  "building state became non-finite at step " +
                      std::to_string(k));
    }
    for (std::size_t j = 0; j < n_inputs; ++j) {
      u(static_cast<Eigen::Index>(j)) = forces[j][k];
    }
    next.noalias() = sys.Ad * z;
    next.noalias() += sys.Bd * u;
    z.swap(next);
  }

  std::vector<Channel> exo;
  for (std::size_t j = 0; j < n_inputs; ++j) {
    exo.push_back({"F" + std::to_string(j + 1), forces[j]});
  }
  std::vector<double> ic;
  if (initial_state.size() != 0) {
    ic.assign(initial_state.data(), initial_state.data() + initial_state.size());
  }
  return Trajectory(grid, std::move(exo), Channel{"y", std::move(y)},
                    std::move(ic));
}

Trajectory simulate_building(const ShearBuildingParams& p,
                             const std::vector<std::vector<double>>& forces,
                             const SamplingGrid& grid) {
  return simulate_building(discretize_building(p, grid.dt), forces, grid);
}

double oscillator_energy(const OscillatorParams& p, double x, double v) {
  double potential = 0.25 * p.cubic_stiffness * x * x * x * x;
  if (p.saturation > 0.0) {
    const double s = p.saturation;
    potential += p.stiffness * s * s * std::log(std::cosh(x / s));
  } else {
    potential += 0.5 * p.stiffness * x * x;
  }
  return 0.5 * p.mass * v * v + potential;
}

OscillatorState integrate_oscillator(const OscillatorParams& p,
                                     const std::vector<double>& force,
                                     const SamplingGrid& grid, double x0,
                                     double v0) {
  p.validate();
  grid.validate();
  if (force.size() != grid.n_steps) {
    throw_invalid("simulate_oscillator: force length differs from grid");
  }
  const double h = grid.dt / p.substeps;
  auto accel = [&p](double x, double v, double f) {
    return (f - p.damping * v - restoring_force(p, x)) / p.mass;
  };

  OscillatorState out;
  out.x.resize(grid.n_steps);
  out.v.resize(grid.n_steps);
  double x = x0, v = v0;
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    out.x[k] = x;
    out.v[k] = v;
    if (!std::isfinite(x) || !std::isfinite(v)) {
      throw Error(ErrorKind::kNumerical,
                  "oscillator state became non-finite at step " +
                      std::to_string(k));
    }
    if (k + 1 == grid.n_steps) break;
    const double f0 = force[k];
    const double df = force[k + 1] - force[k];
    for (int s = 0; s < p.substeps; ++s) {
      const double fa = f0 + df * (static_cast<double>(s) / p.substeps);
      const double fm = f0 + df * ((s + 0.5) / p.substeps);
      const double fb = f0 + df * (static_cast<double>(s + 1) / p.substeps);
      const double k1x = v, k1v = accel(x, v, fa);
      const double k2x = v + 0.5 * h * k1v;
      const double k2v = accel(x + 0.5 * h * k1x, k2x, fm);
      const double k3x = v + 0.5 * h * k2v;
      const double k3v = accel(x + 0.5 * h * k2x, k3x, fm);
      const double k4x = v + h * k3v;
      const double k4v = accel(x + h * k3x, k4x, fb);
      x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
  }
  return out;
}

Trajectory simulate_oscillator(const OscillatorParams& p,
                               const std::vector<double>& force,
                               const SamplingGrid& grid, double x0, double v0) {
  auto state = integrate_oscillator(p, force, grid, x0, v0);
  std::vector<Channel> exo;
  exo.push_back({"F", force});
  if (p.integrated_channels) {
    std::vector<double> i1(force.size(), 0.0), i2(force.size(), 0.0);
    for (std::size_t k = 1; k < force.size(); ++k) {
      i1[k] = i1[k - 1] + 0.5 * grid.dt * (force[k] + force[k - 1]);
      i2[k] = i2[k - 1] + 0.5 * grid.dt * (i1[k] + i1[k - 1]);
    }
    exo.push_back({"F_int", std::move(i1)});
    exo.push_back({"F_int2", std::move(i2)});
  }
  return Trajectory(grid, std::move(exo), Channel{"y", std::move(state.x)},
                    {x0, v0});
}

std::uint64_t realization_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x51ed27ULL));
}

double realization_intensity(const ExcitationParams& p) {
  if (p.intensity_cov == 0.0) return p.intensity;
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s2 = std::log1p(p.intensity_cov * p.intensity_cov);
  const double mu = std::log(p.intensity) - 0.5 * s2;
  return std::exp(mu + std::sqrt(s2) * normal(rng));
}

double realization_corner(const ExcitationParams& p, double dt) {
  double fc = p.corner_frequency;
  if (p.corner_cov > 0.0) {
    // Separate stream so the intensity and noise draws do not depend on it.
    std::mt19937_64 rng(splitmix64(p.seed ^ 0xc0a5e7ULL));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s2 = std::log1p(p.corner_cov * p.corner_cov);
    fc = std::exp(std::log(fc) - 0.5 * s2 + std::sqrt(s2) * normal(rng));
  }
  return std::min(fc, 0.45 / dt);
}

std::vector<std::vector<double>> generate_excitation(const ExcitationParams& p,
                                                     const SamplingGrid& grid,
                                                     std::size_t n_channels) {
  p.validate();
  grid.validate();
  const double fs = 1.0 / grid.dt;
  if (!(p.corner_frequency < 0.5 * fs)) {
    throw_invalid("corner_frequency must be below the Nyquist frequency");
  }

  // Intensity consumes the first draw so it matches realization_intensity().
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double intensity = p.intensity;
  {
    const double z = normal(rng);
    if (p.intensity_cov > 0.0) {
      const double s2 = std::log1p(p.intensity_cov * p.intensity_cov);
      intensity = std::exp(std::log(p.intensity) - 0.5 * s2 + std::sqrt(s2) * z);
    }
  }
  std::vector<double> phases(n_channels);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * pi);
  for (auto& ph : phases) ph = uniform(rng);

  const double corner = realization_corner(p, grid.dt);
  const auto prototype = butterworth_lowpass(corner, fs, p.filter_order);
  const auto gain_length = std::max<std::size_t>(
      8192, static_cast<std::size_t>(200.0 * fs / corner));
  const double gain = noise_gain(prototype, gain_length);
  std::vector<std::vector<Biquad>> filters(n_channels, prototype);

  const double w_common = std::sqrt(p.coherence);
  const double w_own = std::sqrt(1.0 - p.coherence);
  const bool harmonic = p.kind == ExcitationKind::kHarmonicPlusNoise;
  const double noise_share = harmonic ? std::sqrt(1.0 - p.harmonic_fraction) : 1.0;
  const double harmonic_amp =
      harmonic ? std::sqrt(2.0 * p.harmonic_fraction) : 0.0;

  std::vector<std::vector<double>> out(n_channels,
                                       std::vector<double>(grid.n_steps));
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const double common = normal(rng);
    for (std::size_t j = 0; j < n_channels; ++j) {
      const double white = w_common * common + w_own * normal(rng);
      double v = white;
      for (auto& s : filters[j]) v = s.step(v);
      double value = noise_share * v / gain;
      if (harmonic) {
        value += harmonic_amp *
                 std::sin(2.0 * pi * p.harmonic_frequency * grid.time(k) +
                          phases[j]);
      }
      out[j][k] = intensity * value;
    }
  }
  return out;
}

namespace {

template <typename Simulate>
ExperimentalDesign build_design(std::size_t n, bool parallel, Simulate&& sim) {
  if (n < 1) throw_invalid("design size must be >= 1");
  std::vector<std::optional<Trajectory>> slots(n);
  auto body = [&](std::size_t i) { slots[i].emplace(sim(i)); };
  if (parallel) {
    detail::omp_for(n, body);
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
  std::vector<Trajectory> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return ExperimentalDesign(std::move(out));
}

ExperimentalDesign building_design(const ShearBuildingParams& building,
                                   const ExcitationParams& excitation,
                                   const SamplingGrid& grid, std::size_t n,
                                   std::uint64_t seed, bool parallel) {
  const auto sys = discretize_building(building, grid.dt);
  return build_design(n, parallel, [&](std::size_t i) {
    ExcitationParams ex = excitation;
    ex.seed = realization_seed(seed, i);
    return simulate_building(sys, generate_excitation(ex, grid, building.n_stories),
                             grid);
  });
}

ExperimentalDesign oscillator_design(const OscillatorParams& oscillator,
                                     const ExcitationParams& excitation,
                                     const SamplingGrid& grid, std::size_t n,
                                     std::uint64_t seed, bool parallel) {
  return build_design(n, parallel, [&](std::size_t i) {
    ExcitationParams ex = excitation;
    ex.seed = realization_seed(seed, i);
    return simulate_oscillator(oscillator, generate_excitation(ex, grid, 1)[0],
                               grid);
  });
}

}  // namespace

ExperimentalDesign simulate_building_design(const ShearBuildingParams& building,
                                            const ExcitationParams& excitation,
                                            const SamplingGrid& grid,
                                            std::size_t n, std::uint64_t seed) {
  return building_design(building, excitation, grid, n, seed, true);
}

ExperimentalDesign simulate_building_design_serial(
    const ShearBuildingParams& building, const ExcitationParams& excitation,
    const SamplingGrid& grid, std::size_t n, std::uint64_t seed) {
  return building_design(building, excitation, grid, n, seed, false);
}

ExperimentalDesign simulate_oscillator_design(const OscillatorParams& oscillator,
                                              const ExcitationParams& excitation,
                                              const SamplingGrid& grid,
                                              std::size_t n, std::uint64_t seed) {
  return oscillator_design(oscillator, excitation, grid, n, seed, true);
}

ExperimentalDesign simulate_oscillator_design_serial(
    const OscillatorParams& oscillator, const ExcitationParams& excitation,
    const SamplingGrid& grid, std::size_t n, std::uint64_t seed) {
  return oscillator_design(oscillator, excitation, grid, n, seed, false);
}

}  // namespace fnarx
