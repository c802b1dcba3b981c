#include "thermopower/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "thermopower/error.hpp"

namespace thermopower {

TemperatureMap::TemperatureMap(Grid<double> kelvin) : grid_(std::move(kelvin)) {
  if (grid_.height() < 3 || grid_.width() < 3) {
    throw ValidationError("temperature map must be at least 3x3, got " +
                          std::to_string(grid_.height()) + "x" + std::to_string(grid_.width()));
  }
  for (std::size_t row = 0; row < grid_.height(); ++row) {
    for (std::size_t col = 0; col < grid_.width(); ++col) {
      const double t = grid_(row, col);
      if (!std::isfinite(t) || t <= 0.0) {
        throw ValidationError("temperature at row " + std::to_string(row) + ", column " +
                              std::to_string(col) + " is not a positive finite kelvin value");
      }
    }
  }
}

double TemperatureMap::min() const {
  return *std::min_element(grid_.values().begin(), grid_.values().end());
}

double TemperatureMap::max() const {
  return *std::max_element(grid_.values().begin(), grid_.values().end());
}

ComponentLayout::ComponentLayout(Grid<int> ids, std::vector<ComponentInfo> manifest, int mu)
    : ids_(std::move(ids)), manifest_(std::move(manifest)), mu_(mu) {
  if (mu_ < 1) throw ValidationError("material count mu must be >= 1");
  if (ids_.height() < 3 || ids_.width() < 3) throw ValidationError("layout grid must be at least 3x3");
  for (std::size_t i = 0; i < manifest_.size(); ++i) {
    const auto& c = manifest_[i];
    if (c.id < 0) throw ValidationError("negative component id " + std::to_string(c.id));
    if (c.material < 1 || c.material > mu_) {
      throw ValidationError("component " + std::to_string(c.id) + " has material " +
                            std::to_string(c.material) + " outside 1.." + std::to_string(mu_));
    }
    if (!index_.emplace(c.id, i).second) {
      throw ValidationError("duplicate component id " + std::to_string(c.id) + " in manifest");
    }
  }
  const auto board = index_.find(kBoardId);
  if (board == index_.end()) throw ValidationError("manifest is missing the board id 0");
  if (manifest_[board->second].name != "board") {
    throw ValidationError("component 0 must be named \"board\"");
  }
  if (manifest_[board->second].material != kBoardMaterial) {
    throw ValidationError("component 0 must use the board material 1");
  }
  material_ = Grid<int>(ids_.height(), ids_.width(), 0);
  for (std::size_t row = 0; row < ids_.height(); ++row) {
    for (std::size_t col = 0; col < ids_.width(); ++col) {
      const auto it = index_.find(ids_(row, col));
      if (it == index_.end()) {
        throw ValidationError("unknown component id " + std::to_string(ids_(row, col)) +
                              " at row " + std::to_string(row) + ", column " + std::to_string(col));
      }
      material_(row, col) = manifest_[it->second].material - 1;
    }
  }
}

const ComponentInfo& ComponentLayout::info(ComponentId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("unknown component id " + std::to_string(id));
  return manifest_[it->second];
}

std::vector<ComponentId> ComponentLayout::active_ids() const {
  std::vector<ComponentId> out;
  for (const auto& [id, idx] : index_) {
    if (id != kBoardId && manifest_[idx].material != kWireMaterial) out.push_back(id);
  }
  return out;
}

std::vector<ComponentId> ComponentLayout::wire_ids() const {
  std::vector<ComponentId> out;
  for (const auto& [id, idx] : index_) {
    if (id != kBoardId && manifest_[idx].material == kWireMaterial) out.push_back(id);
  }
  return out;
}

Grid<unsigned char> component_mask(const ComponentLayout& layout, ComponentId id) {
  if (!layout.contains(id)) throw ValidationError("unknown component id " + std::to_string(id));
  Grid<unsigned char> mask(layout.height(), layout.width(), 0);
  for (std::size_t row = 0; row < layout.height(); ++row) {
    for (std::size_t col = 0; col < layout.width(); ++col) {
      mask(row, col) = layout.id_at(row, col) == id ? 1 : 0;
    }
  }
  return mask;
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::Int: return "int";
    case Variant::NoRad: return "norad";
    case Variant::NoFlux: return "noflux";
  }
  return "int";
}

std::optional<Variant> parse_variant(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "full") return Variant::Full;
  if (lower == "int") return Variant::Int;
  if (lower == "norad") return Variant::NoRad;
  if (lower == "noflux") return Variant::NoFlux;
  return std::nullopt;
}

std::size_t trained_parameter_count(Variant v, int mu) {
  const auto m = static_cast<std::size_t>(mu);
  const std::size_t pairs = m * (m + 1) / 2;
  switch (v) {
    case Variant::Full: return pairs + m + 2;
    case Variant::Int: return pairs + 2;
    case Variant::NoRad: return pairs + 1;
    case Variant::NoFlux: return pairs;
  }
  return pairs;
}

ModelParams ModelParams::uniform(int mu, double conductance, double emissivity, double h, double r,
                                 Variant variant) {
  ModelParams p;
  p.mu = mu;
  p.conductance.assign(static_cast<std::size_t>(mu * mu), conductance);
  p.emissivity.assign(static_cast<std::size_t>(mu), emissivity);
  p.h = h;
  p.r = r;
  p.variant = variant;
  return p;
}

void ModelParams::set_c(int a, int b, double value) {
  conductance[static_cast<std::size_t>(a * mu + b)] = value;
  conductance[static_cast<std::size_t>(b * mu + a)] = value;
}

void ModelParams::validate() const {
  if (mu < 1) throw ValidationError("mu must be >= 1");
  const auto m = static_cast<std::size_t>(mu);
  if (conductance.size() != m * m) throw ValidationError("conductance matrix must be mu x mu");
  if (emissivity.size() != m) throw ValidationError("emissivity vector must have mu entries");
  for (int a = 0; a < mu; ++a) {
    for (int b = 0; b < mu; ++b) {
      const double v = c(a, b);
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("conductance entries must be finite and >= 0");
      }
      if (v != c(b, a)) throw ValidationError("conductance matrix must be symmetric");
    }
  }
  for (const double e : emissivity) {
    if (!(e > 0.0 && e <= 1.0)) throw ValidationError("emissivities must lie in (0, 1]");
  }
  if (!std::isfinite(h) || h < 0.0) throw ValidationError("convective coefficient h must be >= 0");
  if (!std::isfinite(r) || r < 0.0) throw ValidationError("radiative coefficient r must be >= 0");
}

void MeasurementInstance::validate() const {
  if (maps.empty()) throw ValidationError("instance " + config + " has no temperature maps");
  for (const auto& m : maps) {
    if (m.height() != layout.height() || m.width() != layout.width()) {
      throw ValidationError("instance " + config + ": map and layout shapes differ");
    }
  }
  for (const ComponentId id : layout.active_ids()) {
    if (!truth.contains(id)) {
      throw ValidationError("instance " + config + ": no true power for component " +
                            std::to_string(id));
    }
  }
}

TemperatureMap MeasurementInstance::mean_map() const {
  if (maps.size() == 1) return maps.front();
  Grid<double> sum(maps.front().height(), maps.front().width(), 0.0);
  for (const auto& m : maps) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum.values()[i] += m.grid().values()[i];
  }
  const double n = static_cast<double>(maps.size());
  for (double& v : sum.values()) v /= n;
  return TemperatureMap(std::move(sum));
}

}  // namespace thermopower
