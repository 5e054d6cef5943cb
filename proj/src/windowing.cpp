#include "fnarx/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fnarx/error.hpp"

namespace fnarx {

std::size_t MemoryConfig::steps_for(double memory_s, double dt) {
  if (!(memory_s > 0.0) || !(dt > 0.0)) {
    throw_invalid("memory and dt must be positive");
  }
  const double r = memory_s / dt;
  const double nearest = std::round(r);
  const double steps =
      std::abs(r - nearest) <= 1e-9 * std::max(1.0, r) ? nearest : std::ceil(r);
  return std::max<std::size_t>(1, static_cast<std::size_t>(steps));
}

MemoryConfig MemoryConfig::uniform(double memory_s, double dt,
                                   std::size_t n_exogenous) {
  const auto n = steps_for(memory_s, dt);
  return MemoryConfig{std::vector<std::size_t>(n_exogenous, n), n};
}

MemoryConfig MemoryConfig::from_seconds(std::span<const double> exogenous_s,
                                        double output_s, double dt) {
  MemoryConfig mem;
  for (double s : exogenous_s) mem.exogenous_steps.push_back(steps_for(s, dt));
  mem.output_steps = steps_for(output_s, dt);
  return mem;
}

std::size_t MemoryConfig::max_steps() const {
  std::size_t m = output_steps;
  for (auto s : exogenous_steps) m = std::max(m, s);
  return m;
}

std::size_t MemoryConfig::width(std::size_t j) const {
  if (j < exogenous_steps.size()) return exogenous_steps[j] + 1;
  if (j == exogenous_steps.size()) return output_steps;
  throw_invalid("MemoryConfig::width: channel index out of range");
}

void MemoryConfig::validate() const {
  if (output_steps < 1) throw_invalid("output memory must be >= 1 step");
  for (auto s : exogenous_steps) {
    if (s < 1) throw_invalid("exogenous memory must be >= 1 step");
  }
}

LagSpec LagSpec::full(std::size_t n_exogenous, std::size_t exogenous_order,
                      std::size_t output_order) {
  LagSpec spec;
  std::vector<std::size_t> exo(exogenous_order + 1);
  std::iota(exo.begin(), exo.end(), 0);
  spec.exogenous_lags.assign(n_exogenous, exo);
  spec.output_lags.resize(output_order);
  std::iota(spec.output_lags.begin(), spec.output_lags.end(), 1);
  return spec;
}

MemoryConfig LagSpec::memory() const {
  validate();
  MemoryConfig mem;
  for (const auto& lags : exogenous_lags) {
    mem.exogenous_steps.push_back(
        std::max<std::size_t>(1, *std::max_element(lags.begin(), lags.end())));
  }
  mem.output_steps = *std::max_element(output_lags.begin(), output_lags.end());
  return mem;
}

void LagSpec::validate() const {
  if (output_lags.empty()) throw_invalid("LagSpec needs at least one output lag");
  for (auto l : output_lags) {
    if (l < 1) throw_invalid("output lags must be >= 1");
  }
  for (const auto& lags : exogenous_lags) {
    if (lags.empty()) throw_invalid("LagSpec exogenous lag list is empty");
  }
}

namespace {

void check_design_memory(const ExperimentalDesign& design,
                         const MemoryConfig& mem) {
  mem.validate();
  const auto names = design.exogenous_names();
  if (mem.exogenous_steps.size() != names.size()) {
    throw_invalid("memory config has " +
                  std::to_string(mem.exogenous_steps.size()) +
                  " exogenous channels, design has " +
                  std::to_string(names.size()));
  }
  if (!design.has_output()) {
    throw_invalid("information matrix needs trajectories with an output");
  }
  for (std::size_t i = 0; i < design.size(); ++i) {
    const auto n = design[i].n_steps();
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (mem.exogenous_steps[j] >= n) {
        throw_invalid("memory of channel '" + names[j] + "' (" +
                      std::to_string(mem.exogenous_steps[j]) +
                      " steps) is not shorter than trajectory " +
                      std::to_string(i) + " (" + std::to_string(n) + " steps)");
      }
    }
    if (mem.output_steps >= n) {
      throw_invalid("memory of output channel '" + design.output_name() + "' (" +
                    std::to_string(mem.output_steps) +
                    " steps) is not shorter than trajectory " +
                    std::to_string(i) + " (" + std::to_string(n) + " steps)");
    }
  }
}

}  // namespace

void exogenous_window(const Trajectory& traj, std::size_t channel,
                      std::size_t steps, std::size_t time,
                      std::span<double> out) {
  const auto& v = traj.exogenous(channel).values;
  for (std::size_t c = 0; c <= steps; ++c) out[c] = v[time - c];
}

std::vector<RowRef> design_rows(const ExperimentalDesign& design,
                                const MemoryConfig& mem) {
  check_design_memory(design, mem);
  const std::size_t m = mem.max_steps();
  std::vector<RowRef> rows;
  rows.reserve(design.total_steps());
  for (std::size_t i = 0; i < design.size(); ++i) {
    for (std::size_t t = m; t < design[i].n_steps(); ++t) {
      rows.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(t)});
    }
  }
  return rows;
}

InformationMatrix materialize_rows(const ExperimentalDesign& design,
                                   const MemoryConfig& mem,
                                   std::vector<RowRef> rows) {
  check_design_memory(design, mem);
  InformationMatrix info;
  info.channel_names = design.exogenous_names();
  info.channel_names.push_back(design.output_name());
  info.memory = mem;
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const std::size_t n_exo = mem.exogenous_steps.size();
  for (std::size_t j = 0; j < mem.n_channels(); ++j) {
    info.blocks.emplace_back(n_rows, static_cast<Eigen::Index>(mem.width(j)));
  }
  info.targets.resize(n_rows);

  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto& ref = rows[static_cast<std::size_t>(r)];
    const auto& traj = design[ref.source];
    const std::size_t t = ref.time;
    if (t < mem.max_steps() || t >= traj.n_steps()) {
      throw_invalid("row reference outside its trajectory's valid range");
    }
    for (std::size_t j = 0; j < n_exo; ++j) {
      const auto& v = traj.exogenous(j).values;
      auto& block = info.blocks[j];
      for (std::size_t c = 0; c <= mem.exogenous_steps[j]; ++c) {
        block(r, static_cast<Eigen::Index>(c)) = v[t - c];
      }
    }
    const auto& y = traj.output().values;
    auto& out_block = info.blocks[n_exo];
    for (std::size_t c = 0; c < mem.output_steps; ++c) {
      out_block(r, static_cast<Eigen::Index>(c)) = y[t - 1 - c];
    }
    info.targets(r) = y[t];
  }
  info.rows_index = std::move(rows);
  return info;
}

InformationMatrix build_information_matrix(const Trajectory& traj,
                                           const MemoryConfig& mem) {
  return stack_design(ExperimentalDesign({traj}), mem);
}

InformationMatrix stack_design(const ExperimentalDesign& design,
                               const MemoryConfig& mem) {
  return materialize_rows(design, mem, design_rows(design, mem));
}

std::vector<std::size_t> sample_positions(std::size_t n, std::size_t k,
                                          std::uint64_t seed) {
  std::vector<std::size_t> pos(n);
  std::iota(pos.begin(), pos.end(), 0);
  if (k >= n) return pos;
  // Partial Fisher-Yates with an explicit bounded draw (platform-stable).
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t span = n - i;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw;
    do {
      draw = rng();
    } while (draw >= limit);
    std::swap(pos[i], pos[i + draw % span]);
  }
  pos.resize(k);
  std::sort(pos.begin(), pos.end());
  return pos;
}

InformationMatrix stack_design(const ExperimentalDesign& design,
                               const MemoryConfig& mem, std::size_t max_rows,
                               std::uint64_t seed) {
  if (max_rows < 1) throw_invalid("max_rows must be >= 1");
  auto all = design_rows(design, mem);
  if (max_rows >= all.size()) return materialize_rows(design, mem, std::move(all));
  std::vector<RowRef> kept;
  kept.reserve(max_rows);
  for (auto p : sample_positions(all.size(), max_rows, seed)) kept.push_back(all[p]);
  return materialize_rows(design, mem, std::move(kept));
}

InformationMatrix subsample_rows(const InformationMatrix& info,
                                 std::size_t max_rows, std::uint64_t seed) {
  if (max_rows < 1) throw_invalid("max_rows must be >= 1");
  if (max_rows >= info.rows()) return info;
  const auto pos = sample_positions(info.rows(), max_rows, seed);
  InformationMatrix out;
  out.channel_names = info.channel_names;
  out.memory = info.memory;
  const auto k = static_cast<Eigen::Index>(pos.size());
  for (const auto& block : info.blocks) {
    Eigen::MatrixXd b(k, block.cols());
    for (Eigen::Index r = 0; r < k; ++r) {
      b.row(r) = block.row(static_cast<Eigen::Index>(pos[static_cast<std::size_t>(r)]));
    }
    out.blocks.push_back(std::move(b));
  }
  out.targets.resize(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto p = pos[static_cast<std::size_t>(r)];
    out.targets(r) = info.targets(static_cast<Eigen::Index>(p));
    out.rows_index.push_back(info.rows_index[p]);
  }
  return out;
}

}  // namespace fnarx
