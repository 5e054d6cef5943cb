#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fnarx/timeseries.hpp"

namespace fnarx {

/// Uniform lumped-mass shear building. Defaults are the eight-story wind
/// case: 9.66e6 kg and 1.09e9 N/m per story, 2 % damping, top-floor output.
struct ShearBuildingParams {
  std::size_t n_stories = 8;
  double mass_per_story = 9.66e6;       // kg
  double stiffness_per_story = 1.09e9;  // N/m
  double damping_ratio = 0.02;
  std::size_t output_story = 8;  // 1-based floor index

  void validate() const;
};

enum class ExcitationKind {
  kFilteredGaussian,
  kHarmonicPlusNoise,
};

/// Band-limited stochastic forcing. Each realization draws a lognormal
/// intensity with mean `intensity` and coefficient of variation
/// `intensity_cov`; channels share a common component with weight
/// `coherence`.
struct ExcitationParams {
  ExcitationKind kind = ExcitationKind::kFilteredGaussian;
  double corner_frequency = 1.0;  // Hz
  int filter_order = 8;           // even; cascade of second-order sections
  double intensity = 1.0e6;       // N, standard deviation of each channel
  double intensity_cov = 0.333;
  double corner_cov = 0.0;  // per-realization spread of the corner frequency
  double coherence = 0.5;  // in [0, 1]
  double harmonic_frequency = 0.5;  // Hz, harmonic-plus-noise only
  double harmonic_fraction = 0.5;   // share of variance in the harmonic
  std::uint64_t seed = 0;

  void validate() const;
};

/// Single-degree-of-freedom Duffing-type oscillator:
///   m x'' + c x' + k r(x) + k3 x^3 = F(t),
/// with r(x) = x, or r(x) = s tanh(x / s) when saturation s > 0.
struct OscillatorParams {
  double mass = 1.0;
  double stiffness = 4.0 * 9.869604401089358;  // (2 pi)^2: 1 Hz
  double cubic_stiffness = 0.0;
  double damping = 0.0;
  double saturation = 0.0;
  int substeps = 4;  // RK4 steps per sample
  bool integrated_channels = false;  // also emit force integral and double integral

  void validate() const;
};

struct ModalResult {
  std::vector<double> periods;      // seconds, longest first
  std::vector<double> frequencies;  // rad/s, ascending
  Eigen::MatrixXd mode_shapes;      // columns, mass-normalized
};

Eigen::MatrixXd building_mass(const ShearBuildingParams& p);
Eigen::MatrixXd building_stiffness(const ShearBuildingParams& p);
/// Rayleigh damping a0 M + a1 K matched to damping_ratio on modes 1 and 2.
Eigen::MatrixXd building_damping(const ShearBuildingParams& p);

ModalResult modal_analysis(const ShearBuildingParams& p);

/// Exact zero-order-hold discretization x+ = Ad x + Bd F of the building
/// state [displacements; velocities].
struct DiscreteBuilding {
  Eigen::MatrixXd Ad;
  Eigen::MatrixXd Bd;
  std::size_t output_index = 0;
  double dt = 0.0;
};

DiscreteBuilding discretize_building(const ShearBuildingParams& p, double dt);

/// Integrates the building under per-story forces held constant over each
/// step. Exogenous channels are the forces `F1..Fn`, output is `y`, the
/// displacement of output_story.
Trajectory simulate_building(const ShearBuildingParams& p,
                             const std::vector<std::vector<double>>& forces,
                             const SamplingGrid& grid);

Trajectory simulate_building(const DiscreteBuilding& sys,
                             const std::vector<std::vector<double>>& forces,
                             const SamplingGrid& grid,
                             const Eigen::VectorXd& initial_state = {});

/// RK4 with linear interpolation of the force between samples. Exogenous
/// channel `F` (plus `F_int`, `F_int2` when requested), output `y`.
Trajectory simulate_oscillator(const OscillatorParams& p,
                               const std::vector<double>& force,
                               const SamplingGrid& grid,
                               double x0 = 0.0, double v0 = 0.0);

/// Displacement and velocity histories of the oscillator, full precision.
struct OscillatorState {
  std::vector<double> x;
  std::vector<double> v;
};
OscillatorState integrate_oscillator(const OscillatorParams& p,
                                     const std::vector<double>& force,
                                     const SamplingGrid& grid, double x0,
                                     double v0);

double oscillator_energy(const OscillatorParams& p, double x, double v);

/// Seed-deterministic band-limited channels (n_channels x grid.n_steps).
std::vector<std::vector<double>> generate_excitation(const ExcitationParams& p,
                                                     const SamplingGrid& grid,
                                                     std::size_t n_channels);

/// Seed for realization `index` derived from a base seed.
std::uint64_t realization_seed(std::uint64_t base, std::uint64_t index);

/// Per-realization intensity drawn by generate_excitation for this seed.
double realization_intensity(const ExcitationParams& p);

/// Per-realization corner frequency (lognormal around corner_frequency),
/// capped at 0.45 of the sampling rate.
double realization_corner(const ExcitationParams& p, double dt);

/// n realizations of the building under generate_excitation forcing with
/// seeds realization_seed(seed, i). Parallel over realizations.
ExperimentalDesign simulate_building_design(const ShearBuildingParams& building,
                                            const ExcitationParams& excitation,
                                            const SamplingGrid& grid,
                                            std::size_t n, std::uint64_t seed);
ExperimentalDesign simulate_building_design_serial(
    const ShearBuildingParams& building, const ExcitationParams& excitation,
    const SamplingGrid& grid, std::size_t n, std::uint64_t seed);

ExperimentalDesign simulate_oscillator_design(const OscillatorParams& oscillator,
                                              const ExcitationParams& excitation,
                                              const SamplingGrid& grid,
                                              std::size_t n, std::uint64_t seed);
ExperimentalDesign simulate_oscillator_design_serial(
    const OscillatorParams& oscillator, const ExcitationParams& excitation,
    const SamplingGrid& grid, std::size_t n, std::uint64_t seed);

}  // namespace fnarx
