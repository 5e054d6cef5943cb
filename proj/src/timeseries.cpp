#include "fnarx/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fnarx/error.hpp"

namespace fnarx {

namespace {

constexpr double kGridTolerance = 1e-9;

void check_channel(const Channel& ch, std::size_t n_steps) {
  if (ch.name.empty()) throw_invalid("channel with empty name");
  if (ch.values.size() != n_steps) {
    throw_invalid("channel '" + ch.name + "' has " +
                  std::to_string(ch.values.size()) + " values, grid has " +
                  std::to_string(n_steps));
  }
  for (std::size_t k = 0; k < ch.values.size(); ++k) {
    if (!std::isfinite(ch.values[k])) {
      throw_invalid("channel '" + ch.name + "' has a non-finite value at step " +
                    std::to_string(k));
    }
  }
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

// Returns k >= 1 when a / b is within tolerance of an integer, else 0.
std::size_t integer_ratio(double a, double b) {
  const double r = a / b;
  const double k = std::round(r);
  if (k >= 1.0 && std::abs(r - k) <= kGridTolerance * k) {
    return static_cast<std::size_t>(k);
  }
  return 0;
}

}  // namespace

void SamplingGrid::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw_invalid("grid dt must be > 0");
  if (n_steps < 1) throw_invalid("grid must have at least one step");
  if (!std::isfinite(t_start)) throw_invalid("grid t_start must be finite");
}

Trajectory::Trajectory(SamplingGrid grid, std::vector<Channel> exogenous,
                       std::optional<Channel> output,
                       std::vector<double> initial_conditions)
    : grid_(grid),
      exogenous_(std::move(exogenous)),
      output_(std::move(output)),
      initial_conditions_(std::move(initial_conditions)) {
  grid_.validate();
  std::set<std::string> names;
  for (const auto& ch : exogenous_) {
    check_channel(ch, grid_.n_steps);
    if (!names.insert(ch.name).second) {
      throw_invalid("duplicate channel name '" + ch.name + "'");
    }
  }
  if (output_) {
    check_channel(*output_, grid_.n_steps);
    if (!names.insert(output_->name).second) {
      throw_invalid("duplicate channel name '" + output_->name + "'");
    }
  }
  for (double v : initial_conditions_) {
    if (!std::isfinite(v)) throw_invalid("non-finite initial condition");
  }
}

std::vector<std::string> Trajectory::exogenous_names() const {
  std::vector<std::string> names;
  names.reserve(exogenous_.size());
  for (const auto& ch : exogenous_) names.push_back(ch.name);
  return names;
}

const Channel& Trajectory::output() const {
  if (!output_) throw_invalid("trajectory has no output channel");
  return *output_;
}

Trajectory Trajectory::without_output() const {
  return Trajectory(grid_, exogenous_, std::nullopt, initial_conditions_);
}

Trajectory Trajectory::with_output(Channel output) const {
  return Trajectory(grid_, exogenous_, std::move(output), initial_conditions_);
}

ExperimentalDesign::ExperimentalDesign(std::vector<Trajectory> trajectories)
    : trajectories_(std::move(trajectories)) {
  if (trajectories_.empty()) throw_invalid("experimental design is empty");
  const auto& first = trajectories_.front();
  const auto names = first.exogenous_names();
  for (std::size_t i = 1; i < trajectories_.size(); ++i) {
    const auto& tr = trajectories_[i];
    if (tr.exogenous_names() != names ||
        tr.has_output() != first.has_output() ||
        (tr.has_output() && tr.output().name != first.output().name)) {
      throw_invalid("trajectory " + std::to_string(i) +
                    " does not share the design's channel schema");
    }
    if (std::abs(tr.dt() - first.dt()) > kGridTolerance * first.dt()) {
      throw_invalid("trajectory " + std::to_string(i) +
                    " has a different dt than the design");
    }
  }
}

std::string ExperimentalDesign::output_name() const {
  return trajectories_.front().output().name;
}

std::size_t ExperimentalDesign::total_steps() const {
  std::size_t n = 0;
  for (const auto& tr : trajectories_) n += tr.n_steps();
  return n;
}

ExperimentalDesign ExperimentalDesign::head(std::size_t n) const {
  if (n < 1 || n > trajectories_.size()) {
    throw_invalid("head(" + std::to_string(n) + ") out of range for design of " +
                  std::to_string(trajectories_.size()));
  }
  return ExperimentalDesign(std::vector<Trajectory>(
      trajectories_.begin(), trajectories_.begin() + static_cast<long>(n)));
}

Trajectory load_csv(const std::filesystem::path& path,
                    const ChannelRoles& roles) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::kParse, path.string() + ": missing header row");
  }
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB &&
      static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);  // UTF-8 BOM
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "t") {
    throw Error(ErrorKind::kParse,
                path.string() + ": header must be `t,<channel>[,...]`");
  }

  std::vector<std::vector<double>> columns(header.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::kParse, path.string() + ": row " +
                                         std::to_string(row) + " has " +
                                         std::to_string(fields.size()) +
                                         " fields, expected " +
                                         std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& f = fields[c];
      char* end = nullptr;
      const double v = f.empty() ? NAN : std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v)) {
        throw Error(ErrorKind::kParse, path.string() +
                                           ": missing or non-finite value in "
                                           "column '" +
                                           header[c] + "' at row " +
                                           std::to_string(row));
      }
      columns[c].push_back(v);
    }
    ++row;
  }
  if (row == 0) throw Error(ErrorKind::kParse, path.string() + ": no data rows");

  const auto& t = columns[0];
  SamplingGrid grid;
  grid.n_steps = t.size();
  grid.t_start = t[0];
  if (t.size() == 1) {
    grid.dt = 1.0;
  } else {
    std::vector<double> diffs(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) diffs[i] = t[i + 1] - t[i];
    std::vector<double> sorted = diffs;
    const auto mid = sorted.begin() + static_cast<long>((sorted.size() - 1) / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    grid.dt = *mid;
    if (!(grid.dt > 0.0)) {
      throw Error(ErrorKind::kParse, path.string() + ": time is not increasing");
    }
    for (std::size_t i = 0; i < diffs.size(); ++i) {
      if (std::abs(diffs[i] - grid.dt) > kGridTolerance * grid.dt) {
        throw Error(ErrorKind::kParse, path.string() +
                                           ": non-uniform grid at row " +
                                           std::to_string(i + 1));
      }
    }
    // Decimal step sizes are recovered exactly from the rounded span.
    const double span_dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.15g", span_dt);
    grid.dt = std::strtod(buf, nullptr);
  }

  std::optional<Channel> output;
  std::vector<Channel> exogenous;
  auto column_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t c = 1; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    throw Error(ErrorKind::kParse,
                path.string() + ": no column named '" + name + "'");
  };
  if (roles.output) {
    const auto c = column_of(*roles.output);
    output = Channel{header[c], std::move(columns[c])};
  }
  if (roles.exogenous.empty()) {
    for (std::size_t c = 1; c < header.size(); ++c) {
      if (roles.output && header[c] == *roles.output) continue;
      exogenous.push_back(Channel{header[c], std::move(columns[c])});
    }
  } else {
    for (const auto& name : roles.exogenous) {
      const auto c = column_of(name);
      exogenous.push_back(Channel{header[c], columns[c]});
    }
  }
  return Trajectory(grid, std::move(exogenous), std::move(output));
}

void save_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::string out = "t";
  for (const auto& ch : traj.exogenous()) out += "," + ch.name;
  if (traj.has_output()) out += "," + traj.output().name;
  out += '\n';
  for (std::size_t k = 0; k < traj.n_steps(); ++k) {
    append_number(out, traj.grid().time(k));
    for (const auto& ch : traj.exogenous()) {
      out += ',';
      append_number(out, ch.values[k]);
    }
    if (traj.has_output()) {
      out += ',';
      append_number(out, traj.output().values[k]);
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  f << out;
  if (!f) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

Trajectory resample(const Trajectory& traj, double new_dt) {
  if (!(new_dt > 0.0)) throw_invalid("resample: new_dt must be > 0");
  const double dt = traj.dt();
  const std::size_t n = traj.n_steps();

  std::function<std::vector<double>(const std::vector<double>&)> map;
  std::size_t new_n = 0;
  if (const auto up = integer_ratio(dt, new_dt); up >= 1) {
    new_n = (n - 1) * up + 1;
    map = [up, new_n](const std::vector<double>& v) {
      std::vector<double> out(new_n);
      for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        out[i * up] = v[i];
        for (std::size_t s = 1; s < up; ++s) {
          const double w = static_cast<double>(s) / static_cast<double>(up);
          out[i * up + s] = v[i] + (v[i + 1] - v[i]) * w;
        }
      }
      out[new_n - 1] = v.back();
      return out;
    };
  } else if (const auto down = integer_ratio(new_dt, dt); down >= 1) {
    new_n = (n - 1) / down + 1;
    map = [down, new_n](const std::vector<double>& v) {
      std::vector<double> out(new_n);
      for (std::size_t j = 0; j < new_n; ++j) out[j] = v[j * down];
      return out;
    };
  } else {
    throw_invalid("resample: dt ratio " + std::to_string(dt / new_dt) +
                  " is not an integer or the inverse of one");
  }

  SamplingGrid grid{new_dt, new_n, traj.grid().t_start};
  std::vector<Channel> exo;
  exo.reserve(traj.n_exogenous());
  for (const auto& ch : traj.exogenous()) exo.push_back({ch.name, map(ch.values)});
  std::optional<Channel> output;
  if (traj.has_output()) {
    output = Channel{traj.output().name, map(traj.output().values)};
  }
  return Trajectory(grid, std::move(exo), std::move(output),
                    traj.initial_conditions());
}

ExperimentalDesign resample(const ExperimentalDesign& design, double new_dt) {
  std::vector<Trajectory> out;
  out.reserve(design.size());
  for (const auto& tr : design) out.push_back(resample(tr, new_dt));
  return ExperimentalDesign(std::move(out));
}

ExperimentalDesign concat_designs(const ExperimentalDesign& a,
                                  const ExperimentalDesign& b) {
  std::vector<Trajectory> all = a.trajectories();
  all.insert(all.end(), b.begin(), b.end());
  return ExperimentalDesign(std::move(all));
}

std::pair<ExperimentalDesign, ExperimentalDesign> split_design(
    const ExperimentalDesign& design, std::size_t n_train, std::uint64_t seed) {
  if (n_train < 1 || n_train >= design.size()) {
    throw_invalid("split_design: n_train=" + std::to_string(n_train) +
                  " must be in [1, " + std::to_string(design.size() - 1) + "]");
  }
  std::vector<std::size_t> order(design.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Trajectory> first, second;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? first : second).push_back(design[order[i]]);
  }
  return {ExperimentalDesign(std::move(first)),
          ExperimentalDesign(std::move(second))};
}

std::filesystem::path write_design(const ExperimentalDesign& design,
                                   const std::filesystem::path& dir,
                                   const std::string& prefix) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["schema"] = "fnarx.design/1";
  manifest["channels"]["exogenous"] = design.exogenous_names();
  if (design.has_output()) manifest["channels"]["output"] = design.output_name();
  manifest["dt"] = design.dt();
  auto& list = manifest["trajectories"] = nlohmann::json::array();
  const int width = design.size() > 1000 ? 5 : 4;
  for (std::size_t i = 0; i < design.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%0*zu.csv", prefix.c_str(), width, i);
    save_csv(design[i], dir / name);
    nlohmann::json entry;
    entry["path"] = name;
    entry["n_steps"] = design[i].n_steps();
    list.push_back(entry);
  }
  const auto path = dir / "manifest.json";
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  f << manifest.dump(2) << '\n';
  return path;
}

ExperimentalDesign read_design(const std::filesystem::path& manifest_path) {
  std::ifstream f(manifest_path);
  if (!f) {
    throw Error(ErrorKind::kIo, "cannot open '" + manifest_path.string() + "'");
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, manifest_path.string() + ": " + e.what());
  }
  ChannelRoles roles;
  try {
    const auto& ch = manifest.at("channels");
    if (ch.contains("exogenous")) {
      roles.exogenous = ch.at("exogenous").get<std::vector<std::string>>();
    }
    if (ch.contains("output") && !ch.at("output").is_null()) {
      roles.output = ch.at("output").get<std::string>();
    }
    std::vector<Trajectory> trajectories;
    const auto base = manifest_path.parent_path();
    for (const auto& entry : manifest.at("trajectories")) {
      std::filesystem::path p = entry.at("path").get<std::string>();
      if (p.is_relative()) p = base / p;
      trajectories.push_back(load_csv(p, roles));
    }
    return ExperimentalDesign(std::move(trajectories));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, manifest_path.string() + ": " + e.what());
  }
}

}  // namespace fnarx
