#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fnarx/timeseries.hpp"

namespace fnarx {

/// Window lengths in steps, per exogenous channel (trajectory order) and for
/// the output. An exogenous window of n steps holds n + 1 values
/// {x(t), ..., x(t - n dt)}; the output window holds n values
/// {y(t - dt), ..., y(t - n dt)}.
struct MemoryConfig {
  std::vector<std::size_t> exogenous_steps;
  std::size_t output_steps = 1;

  /// n_t = ceil(T / dt), with T / dt within 1e-9 of an integer taken as
  /// that integer.
  static std::size_t steps_for(double memory_s, double dt);
  static MemoryConfig uniform(double memory_s, double dt, std::size_t n_exogenous);
  static MemoryConfig from_seconds(std::span<const double> exogenous_s,
                                   double output_s, double dt);

  std::size_t max_steps() const;
  std::size_t n_channels() const { return exogenous_steps.size() + 1; }
  /// Window width of channel j (exogenous first, output last).
  std::size_t width(std::size_t j) const;
  void validate() const;
};

/// Explicit lag lists for the classical-NARX configuration.
struct LagSpec {
  std::vector<std::vector<std::size_t>> exogenous_lags;  // each may contain 0
  std::vector<std::size_t> output_lags;                  // each >= 1

  /// Lags {0..exogenous_order} for every exogenous channel and
  /// {1..output_order} for the output.
  static LagSpec full(std::size_t n_exogenous, std::size_t exogenous_order,
                      std::size_t output_order);
  MemoryConfig memory() const;
  void validate() const;
};

/// Identifies one row: trajectory `source`, target time index `time`.
struct RowRef {
  std::uint32_t source = 0;
  std::uint32_t time = 0;
  bool operator==(const RowRef&) const = default;
};

/// Per-channel window blocks aligned with output targets. Row r has target
/// y(time[r]) of trajectory source[r].
struct InformationMatrix {
  std::vector<std::string> channel_names;  // exogenous..., output
  MemoryConfig memory;
  std::vector<Eigen::MatrixXd> blocks;     // rows x width(j)
  Eigen::VectorXd targets;
  std::vector<RowRef> rows_index;

  std::size_t rows() const { return rows_index.size(); }
  std::size_t n_channels() const { return blocks.size(); }
};

/// Windows of one trajectory. Rows t = max_steps .. N-1, oldest first.
InformationMatrix build_information_matrix(const Trajectory& traj,
                                           const MemoryConfig& mem);

/// Concatenation of per-trajectory matrices; windows never cross trajectories.
InformationMatrix stack_design(const ExperimentalDesign& design,
                               const MemoryConfig& mem);

/// stack_design followed by subsample_rows, without materializing the rows
/// that would be dropped. Gives the same matrix as the two-step route.
InformationMatrix stack_design(const ExperimentalDesign& design,
                               const MemoryConfig& mem, std::size_t max_rows,
                               std::uint64_t seed);

/// Uniform subset of at most max_rows rows without replacement, kept in their
/// original order. Returns the input when max_rows >= rows().
InformationMatrix subsample_rows(const InformationMatrix& info,
                                 std::size_t max_rows, std::uint64_t seed);

/// All row references of a design, in stacking order.
std::vector<RowRef> design_rows(const ExperimentalDesign& design,
                                const MemoryConfig& mem);

/// Sorted positions of a seeded uniform subset of size min(k, n) from [0, n).
std::vector<std::size_t> sample_positions(std::size_t n, std::size_t k,
                                          std::uint64_t seed);

/// Builds the blocks for an explicit list of rows.
InformationMatrix materialize_rows(const ExperimentalDesign& design,
                                   const MemoryConfig& mem,
                                   std::vector<RowRef> rows);

/// Copies the window of exogenous channel `channel` ending at `time` into out
/// (size steps + 1, newest first).
void exogenous_window(const Trajectory& traj, std::size_t channel,
                      std::size_t steps, std::size_t time, std::span<double> out);

}  // namespace fnarx
