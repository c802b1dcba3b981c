#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thermopower/grid.hpp"

namespace thermopower {

using ComponentId = int;

// Material palette. Indices are 1-based in files and manifests.
inline constexpr int kBoardMaterial = 1;
inline constexpr int kWireMaterial = 2;
inline constexpr ComponentId kBoardId = 0;

/// Absolute temperatures in kelvin on an H x W grid, H, W >= 3.
class TemperatureMap {
public:
  /// Throws ValidationError on a non-finite or non-positive value or H, W < 3.
  explicit TemperatureMap(Grid<double> kelvin);

  std::size_t height() const { return grid_.height(); }
  std::size_t width() const { return grid_.width(); }
  double operator()(std::size_t row, std::size_t col) const { return grid_(row, col); }
  const Grid<double>& grid() const { return grid_; }

  double min() const;
  double max() const;

  friend bool operator==(const TemperatureMap&, const TemperatureMap&) = default;

private:
  Grid<double> grid_;
};

struct ComponentInfo {
  ComponentId id = 0;
  std::string name;
  int material = kBoardMaterial;  // 1..mu

  friend bool operator==(const ComponentInfo&, const ComponentInfo&) = default;
};

/// Per-cell component ids plus the manifest mapping each id to a material.
///
/// Material 1 is the board, material 2 holds the low-emissivity wires, and
/// materials 3..mu are active parts. Id 0 is always the board.
class ComponentLayout {
public:
  /// Throws ValidationError when the grid and manifest disagree.
  ComponentLayout(Grid<int> ids, std::vector<ComponentInfo> manifest, int mu);

  std::size_t height() const { return ids_.height(); }
  std::size_t width() const { return ids_.width(); }
  int mu() const { return mu_; }
  const Grid<int>& ids() const { return ids_; }
  const std::vector<ComponentInfo>& manifest() const { return manifest_; }

  ComponentId id_at(std::size_t row, std::size_t col) const { return ids_(row, col); }
  /// Zero-based material index of a cell, ready for palette lookup.
  int material_at(std::size_t row, std::size_t col) const { return material_(row, col); }

  bool contains(ComponentId id) const { return index_.contains(id); }
  /// Throws ValidationError for ids missing from the manifest.
  const ComponentInfo& info(ComponentId id) const;

  bool is_wire(ComponentId id) const { return info(id).material == kWireMaterial; }
  /// Ids that are neither the board nor wires, ascending.
  std::vector<ComponentId> active_ids() const;
  /// Ids whose material is the wire material, ascending.
  std::vector<ComponentId> wire_ids() const;

  friend bool operator==(const ComponentLayout& a, const ComponentLayout& b) {
    return a.mu_ == b.mu_ && a.ids_ == b.ids_ && a.manifest_ == b.manifest_;
  }

private:
  Grid<int> ids_;
  std::vector<ComponentInfo> manifest_;
  int mu_;
  std::map<ComponentId, std::size_t> index_;
  Grid<int> material_;
};

/// Binary mask that is 1 exactly where the layout carries `id`.
Grid<unsigned char> component_mask(const ComponentLayout& layout, ComponentId id);

enum class Variant { Full, Int, NoRad, NoFlux };

std::string_view to_string(Variant v);
/// Accepts full|int|norad|noflux, case-insensitive.
std::optional<Variant> parse_variant(std::string_view text);

/// Number of trained parameters for a variant given mu materials.
std::size_t trained_parameter_count(Variant v, int mu);

/// Lumped parameters of the pixel power-flow model.
struct ModelParams {
  int mu = 3;
  std::vector<double> conductance;  // mu*mu row-major, W/K per cell edge
  std::vector<double> emissivity;   // mu entries in (0, 1]
  double h = 0.0;                   // W/K per cell
  double r = 0.0;                   // W/K^4 per cell
  Variant variant = Variant::Int;

  static ModelParams uniform(int mu, double conductance, double emissivity, double h, double r,
                             Variant variant = Variant::Int);

  /// Zero-based material indices.
  double c(int a, int b) const { return conductance[static_cast<std::size_t>(a * mu + b)]; }
  /// Sets both (a,b) and (b,a).
  void set_c(int a, int b, double value);

  /// Throws ValidationError on asymmetry, negative values, or emissivity outside (0, 1].
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Per-cell electrical power in watts. Border cells hold NaN ("undefined").
using PowerMap = Grid<double>;

struct MeasurementInstance {
  std::vector<TemperatureMap> maps;  // repeated readings
  ComponentLayout layout;
  double voltage = 0.0;
  std::map<ComponentId, double> truth;  // watts, active components only
  std::string config;
  int voltage_index = 0;

  /// Throws ValidationError if maps and layout disagree or truth is incomplete.
  void validate() const;
  /// Cell-wise mean of the readings.
  TemperatureMap mean_map() const;
};

}  // namespace thermopower
