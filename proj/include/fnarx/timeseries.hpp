#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fnarx {

/// Uniform time grid: t_k = t_start + k * dt, k = 0 .. n_steps - 1.
struct SamplingGrid {
  double dt = 1.0;
  std::size_t n_steps = 1;
  double t_start = 0.0;

  double time(std::size_t k) const {
    return t_start + static_cast<double>(k) * dt;
  }
  double duration() const {
    return static_cast<double>(n_steps - 1) * dt;
  }
  void validate() const;
};

struct Channel {
  std::string name;
  std::vector<double> values;
};

/// One realization of the system: M exogenous channels, an optional output
/// channel and optional initial conditions, all on a shared grid. Immutable
/// once constructed.
class Trajectory {
 public:
  Trajectory(SamplingGrid grid, std::vector<Channel> exogenous,
             std::optional<Channel> output = std::nullopt,
             std::vector<double> initial_conditions = {});

  const SamplingGrid& grid() const { return grid_; }
  std::size_t n_steps() const { return grid_.n_steps; }
  double dt() const { return grid_.dt; }

  std::size_t n_exogenous() const { return exogenous_.size(); }
  const std::vector<Channel>& exogenous() const { return exogenous_; }
  const Channel& exogenous(std::size_t i) const { return exogenous_.at(i); }
  std::vector<std::string> exogenous_names() const;

  bool has_output() const { return output_.has_value(); }
  /// Throws if the trajectory carries no output channel.
  const Channel& output() const;
  const std::optional<Channel>& output_channel() const { return output_; }

  const std::vector<double>& initial_conditions() const {
    return initial_conditions_;
  }

  /// Copy with the output channel removed (exogenous-only input for forecasts).
  Trajectory without_output() const;
  /// Copy with the output channel replaced.
  Trajectory with_output(Channel output) const;

 private:
  SamplingGrid grid_;
  std::vector<Channel> exogenous_;
  std::optional<Channel> output_;
  std::vector<double> initial_conditions_;
};

/// Ordered set of realizations sharing channel schema and dt. Trajectory
/// lengths may differ.
class ExperimentalDesign {
 public:
  explicit ExperimentalDesign(std::vector<Trajectory> trajectories);

  std::size_t size() const { return trajectories_.size(); }
  const Trajectory& operator[](std::size_t i) const { return trajectories_[i]; }
  const std::vector<Trajectory>& trajectories() const { return trajectories_; }
  auto begin() const { return trajectories_.begin(); }
  auto end() const { return trajectories_.end(); }

  double dt() const { return trajectories_.front().dt(); }
  std::vector<std::string> exogenous_names() const {
    return trajectories_.front().exogenous_names();
  }
  bool has_output() const { return trajectories_.front().has_output(); }
  std::string output_name() const;
  std::size_t total_steps() const;

  /// First n trajectories, in order (n >= 1).
  ExperimentalDesign head(std::size_t n) const;

 private:
  std::vector<Trajectory> trajectories_;
};

/// Which CSV columns are exogenous inputs and which is the output. An empty
/// exogenous list means "every column except time and the output".
struct ChannelRoles {
  std::vector<std::string> exogenous;
  std::optional<std::string> output;
};

/// Reads a trajectory CSV (header `t,<channels...>`). dt is the median
/// successive time difference; deviations beyond 1e-9 relative are rejected.
Trajectory load_csv(const std::filesystem::path& path,
                    const ChannelRoles& roles = {});

/// Writes `t,<exogenous...>,<output>` with 17 significant digits.
void save_csv(const Trajectory& traj, const std::filesystem::path& path);

/// Integer-ratio resampling: linear interpolation when new_dt = dt / k,
/// keep-every-k-th when new_dt = dt * k. Other ratios are rejected.
Trajectory resample(const Trajectory& traj, double new_dt);

ExperimentalDesign resample(const ExperimentalDesign& design, double new_dt);

ExperimentalDesign concat_designs(const ExperimentalDesign& a,
                                  const ExperimentalDesign& b);

/// Seeded shuffle, then the first n_train trajectories go to the first design
/// and the rest to the second. Requires 1 <= n_train < design.size().
std::pair<ExperimentalDesign, ExperimentalDesign> split_design(
    const ExperimentalDesign& design, std::size_t n_train, std::uint64_t seed);

/// Writes one CSV per trajectory plus `manifest.json` into `dir`.
/// Returns the manifest path.
std::filesystem::path write_design(const ExperimentalDesign& design,
                                   const std::filesystem::path& dir,
                                   const std::string& prefix = "traj");

/// Loads a design from a manifest written by write_design (or by hand).
ExperimentalDesign read_design(const std::filesystem::path& manifest);

}  // namespace fnarx
