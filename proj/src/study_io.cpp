#include "fnarx/study_io.hpp"

#include <cmath>

#include "fnarx/error.hpp"
#include "fnarx/json_reader.hpp"

namespace fnarx {

using nlohmann::json;

namespace {

template <typename T>
T validated(T value, const std::string& where) {
  try {
    value.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kInvalidArgument, where + ": " + e.what());
  }
  return value;
}

const json& section(JsonReader& r, const std::string& key) {
  static const json empty = json::object();
  const auto& v = r.raw(key);
  return v.is_null() ? empty : v;
}

}  // namespace

json to_json(const ShearBuildingParams& p) {
  return {{"n_stories", p.n_stories},
          {"mass_per_story", p.mass_per_story},
          {"stiffness_per_story", p.stiffness_per_story},
          {"damping_ratio", p.damping_ratio},
          {"output_story", p.output_story}};
}

ShearBuildingParams building_from_json(const json& j, bool strict, const std::string& where) {
  JsonReader r(j, where, strict);
  ShearBuildingParams p;
  p.n_stories = r.get("n_stories", p.n_stories);
  p.mass_per_story = r.get("mass_per_story", p.mass_per_story);
  p.stiffness_per_story = r.get("stiffness_per_story", p.stiffness_per_story);
  p.damping_ratio = r.get("damping_ratio", p.damping_ratio);
  p.output_story = r.get("output_story", r.has("n_stories") && !r.has("output_story")
                                             ? p.n_stories
                                             : p.output_story);
  r.finish();
  return validated(p, where);
}

json to_json(const OscillatorParams& p) {
  return {{"mass", p.mass},
          {"stiffness", p.stiffness},
          {"cubic_stiffness", p.cubic_stiffness},
          {"damping", p.damping},
          {"saturation", p.saturation},
          {"substeps", p.substeps},
          {"integrated_channels", p.integrated_channels}};
}

OscillatorParams oscillator_from_json(const json& j, bool strict, const std::string& where) {
  JsonReader r(j, where, strict);
  OscillatorParams p;
  p.mass = r.get("mass", p.mass);
  p.stiffness = r.get("stiffness", p.stiffness);
  p.cubic_stiffness = r.get("cubic_stiffness", p.cubic_stiffness);
  p.damping = r.get("damping", p.damping);
  p.saturation = r.get("saturation", p.saturation);
  p.substeps = r.get("substeps", p.substeps);
  p.integrated_channels = r.get("integrated_channels", p.integrated_channels);
  r.finish();
  return validated(p, where);
}

json to_json(const ExcitationParams& p) {
  return {{"kind", p.kind == ExcitationKind::kFilteredGaussian ? "filtered_gaussian"
                                                               : "harmonic_plus_noise"},
          {"corner_frequency", p.corner_frequency},
          {"filter_order", p.filter_order},
          {"intensity", p.intensity},
          {"intensity_cov", p.intensity_cov},
          {"corner_cov", p.corner_cov},
          {"coherence", p.coherence},
          {"harmonic_frequency", p.harmonic_frequency},
          {"harmonic_fraction", p.harmonic_fraction}};
}

ExcitationParams excitation_from_json(const json& j, bool strict, const std::string& where) {
  JsonReader r(j, where, strict);
  ExcitationParams p;
  if (auto k = r.opt<std::string>("kind")) {
    if (*k == "filtered_gaussian") {
      p.kind = ExcitationKind::kFilteredGaussian;
    } else if (*k == "harmonic_plus_noise") {
      p.kind = ExcitationKind::kHarmonicPlusNoise;
    } else {
      r.fail("kind must be \"filtered_gaussian\" or \"harmonic_plus_noise\", got \"" + *k +
             "\"");
    }
  }
  p.corner_frequency = r.get("corner_frequency", p.corner_frequency);
  p.filter_order = r.get("filter_order", p.filter_order);
  p.intensity = r.get("intensity", p.intensity);
  p.intensity_cov = r.get("intensity_cov", p.intensity_cov);
  p.corner_cov = r.get("corner_cov", p.corner_cov);
  p.coherence = r.get("coherence", p.coherence);
  p.harmonic_frequency = r.get("harmonic_frequency", p.harmonic_frequency);
  p.harmonic_fraction = r.get("harmonic_fraction", p.harmonic_fraction);
  r.finish();
  return validated(p, where);
}

ExperimentalDesign StudySpec::design(std::uint64_t split, std::size_t n) const {
  if (!(dt > 0.0) || !(duration > dt)) throw_invalid("study needs 0 < dt < duration");
  SamplingGrid grid;
  grid.dt = dt;
  grid.n_steps = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
  const auto s = realization_seed(seed, split);
  return kind == CaseKind::kBuilding
             ? simulate_building_design(building, excitation, grid, n, s)
             : simulate_oscillator_design(oscillator, excitation, grid, n, s);
}

CaseStudy StudySpec::generate() const { return {design(0, n_train), design(1, n_validation)}; }

json to_json(const StudySpec& s) {
  json j;
  j["case"] = s.kind == CaseKind::kBuilding ? "building" : "oscillator";
  if (s.kind == CaseKind::kBuilding) {
    j["building"] = to_json(s.building);
  } else {
    j["oscillator"] = to_json(s.oscillator);
  }
  j["excitation"] = to_json(s.excitation);
  j["dt"] = s.dt;
  j["duration"] = s.duration;
  j["n_train"] = s.n_train;
  j["n_validation"] = s.n_validation;
  j["seed"] = s.seed;
  return j;
}

StudySpec study_from_json(const json& j, bool strict, const std::string& where) {
  JsonReader r(j, where, strict);
  StudySpec s;
  const auto kind = r.get<std::string>("case", "building");
  if (kind == "building") {
    s.kind = CaseKind::kBuilding;
    s.building = building_from_json(section(r, "building"), strict,
                                    r.path("building"));
  } else if (kind == "oscillator") {
    s.kind = CaseKind::kOscillator;
    s.oscillator = oscillator_from_json(section(r, "oscillator"), strict,
                                        r.path("oscillator"));
    s.dt = 0.02;
    s.duration = 30.0;
  } else {
    r.fail("case must be \"building\" or \"oscillator\", got \"" + kind + "\"");
  }
  s.excitation = excitation_from_json(section(r, "excitation"), strict,
                                      r.path("excitation"));
  s.dt = r.get("dt", s.dt);
  s.duration = r.get("duration", s.duration);
  s.n_train = r.get("n_train", s.n_train);
  s.n_validation = r.get("n_validation", s.n_validation);
  s.seed = r.get("seed", s.seed);
  r.finish();
  if (!(s.dt > 0.0) || !(s.duration > s.dt)) r.fail("need 0 < dt < duration");
  return s;
}

}  // namespace fnarx
