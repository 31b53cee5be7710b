#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ranslice/domain.hpp"

namespace ranslice {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json scenario_to_json(const ScenarioConfig& cfg);

// Keys absent from `j` keep their default-scenario values; arrays (orus,
// users, hidden layers) replace the default wholesale. Unknown keys are
// rejected.
ScenarioConfig scenario_from_json(const nlohmann::json& j);

ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const ScenarioConfig& cfg);

}  // namespace ranslice
