#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermopower/simulator.hpp"
#include "thermopower/types.hpp"

namespace thermopower {

/// `{"mu", "conductance": [[...]], "emissivity": [...], "h", "r", "variant"}`.
nlohmann::json params_to_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& j);
/// Accepts a bare parameter block or any object with a `params` member
/// (such as a fit report).
ModelParams load_params(const std::filesystem::path& path);
void save_params(const std::filesystem::path& path, const ModelParams& params);

/// One configuration of a scenario file. Either `resistances` (driven by the
/// scenario's voltages) or `injections` (a single fixed-power instance).
struct ScenarioConfig {
  std::string label;
  std::filesystem::path layout_path;
  ComponentLayout layout;
  double t_amb = 300.15;
  std::map<ComponentId, double> resistances;
  std::map<ComponentId, double> injections;
  double series_resistance = 0.0;
};

struct ScenarioFile {
  ModelParams params;
  double sigma = 0.1;
  int readings = 5;
  std::uint64_t seed = 1;
  std::vector<double> voltages;
  std::vector<ScenarioConfig> configs;
};

/// Layout paths resolve against the scenario file's directory.
ScenarioFile load_scenario(const std::filesystem::path& path);

/// Simulates every configuration. Resistor configurations come first in file
/// order, one instance per voltage; injection configurations add one instance
/// each. Instance seeds are keyed by the position in the returned list.
std::vector<MeasurementInstance> simulate_scenario(const ScenarioFile& scenario);

/// Writes `maps/`, `layouts/` and the manifest `instances.json` under `dir`.
/// Returns the manifest path.
std::filesystem::path save_dataset(const std::filesystem::path& dir,
                                   const std::vector<MeasurementInstance>& dataset);
std::vector<MeasurementInstance> load_dataset(const std::filesystem::path& manifest);

/// The four resistor configurations as a scenario file plus layouts, written
/// under `dir`. Returns the scenario path.
std::filesystem::path write_preset_scenario(const std::filesystem::path& dir, double sigma,
                                            int readings, std::uint64_t seed, bool leads = true);

/// Reads a whole text file; throws Error naming the path when it cannot.
std::string read_text(const std::filesystem::path& path);
/// Writes a whole text file, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace thermopower
