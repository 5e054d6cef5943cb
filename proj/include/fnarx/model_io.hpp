#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "fnarx/model.hpp"

namespace fnarx {

nlohmann::json to_json(const ModelConfig& config);
/// Strict mode rejects unknown keys; `where` prefixes error locations.
ModelConfig model_config_from_json(const nlohmann::json& j, bool strict,
                                   const std::string& where = "");

nlohmann::json to_json(const SearchGrid& grid);
SearchGrid search_grid_from_json(const nlohmann::json& j, bool strict,
                                 const std::string& where = "");

/// Versioned artifact; doubles are written with round-trip precision and
/// unknown fields are ignored on read.
nlohmann::json to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);

void save_model(const FittedModel& model, const std::filesystem::path& path);
FittedModel load_model(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace fnarx
