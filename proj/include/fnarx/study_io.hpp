#pragma once

#include <string>

#include "json.hpp"

#include "fnarx/experiments.hpp"
#include "fnarx/simulate.hpp"

namespace fnarx {

nlohmann::json to_json(const ShearBuildingParams& p);
ShearBuildingParams building_from_json(const nlohmann::json& j, bool strict,
                                       const std::string& where = "building");

nlohmann::json to_json(const OscillatorParams& p);
OscillatorParams oscillator_from_json(const nlohmann::json& j, bool strict,
                                      const std::string& where = "oscillator");

/// `seed` is not part of the object; callers supply it separately.
nlohmann::json to_json(const ExcitationParams& p);
ExcitationParams excitation_from_json(const nlohmann::json& j, bool strict,
                                      const std::string& where = "excitation");

enum class CaseKind { kBuilding, kOscillator };

/// Synthetic case study description: which system, its parameters, the
/// forcing, the grid and how many realizations go to each split.
struct StudySpec {
  CaseKind kind = CaseKind::kBuilding;
  ShearBuildingParams building;
  OscillatorParams oscillator;
  ExcitationParams excitation;
  double dt = 0.025;
  double duration = 60.0;
  std::size_t n_train = 100;
  std::size_t n_validation = 200;
  std::uint64_t seed = 1;

  /// Split 0 is training, split 1 validation; each has its own seed stream.
  ExperimentalDesign design(std::uint64_t split, std::size_t n) const;
  CaseStudy generate() const;
};

nlohmann::json to_json(const StudySpec& s);
/// Missing dt and duration default per case: 0.025 s / 60 s for the building,
/// 0.02 s / 30 s for the oscillator.
StudySpec study_from_json(const nlohmann::json& j, bool strict,
                          const std::string& where = "study");

}  // namespace fnarx
