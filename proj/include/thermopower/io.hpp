#pragma once

#include <filesystem>
#include <string>

#include "thermopower/grid.hpp"
#include "thermopower/types.hpp"

namespace thermopower {

enum class GridUnit { Kelvin, Celsius, Watt };

/// A numeric grid file: `# unit=K|C|W height=H width=W` followed by H rows of
/// W comma-separated decimals. Values are stored as written (no conversion).
struct GridFile {
  GridUnit unit = GridUnit::Kelvin;
  Grid<double> values;
};

GridFile read_grid_file(const std::filesystem::path& path);
/// Values are written in shortest round-trip form, so a reload is bit-exact.
void write_grid_file(const std::filesystem::path& path, const GridFile& file);

/// Loads and validates a temperature map; celsius input is shifted to kelvin.
TemperatureMap load_temperature_map(const std::filesystem::path& path);
void save_temperature_map(const std::filesystem::path& path, const TemperatureMap& map);

/// Border cells (NaN) are written as `nan`.
void save_power_map(const std::filesystem::path& path, const PowerMap& map);
PowerMap load_power_map(const std::filesystem::path& path);

/// Reads the JSON manifest and the integer CSV grid it points to. A relative
/// grid path resolves against the manifest's directory.
ComponentLayout load_layout(const std::filesystem::path& path);
/// Writes `<stem>.json` at `path` and the grid next to it as `<stem>_grid.csv`.
void save_layout(const std::filesystem::path& path, const ComponentLayout& layout);

/// Shortest decimal that reads back to the same double.
std::string format_double(double value);

}  // namespace thermopower
