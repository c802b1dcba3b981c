#include "thermopower/powerflow.hpp"

#include <cmath>
#include <limits>

#include "thermopower/error.hpp"
#include "thermopower/preprocess.hpp"

namespace thermopower {

ConductanceFields conductance_fields(const ComponentLayout& layout, const ModelParams& params) {
  if (params.mu != layout.mu()) throw ValidationError("layout and parameters disagree on mu");
  const std::size_t H = layout.height();
  const std::size_t W = layout.width();
  ConductanceFields f{Grid<double>(H, W, 0.0), Grid<double>(H, W, 0.0), Grid<double>(H, W, 0.0),
                      Grid<double>(H, W, 0.0)};
  for (std::size_t row = 1; row + 1 < H; ++row) {
    for (std::size_t col = 1; col + 1 < W; ++col) {
      const int m = layout.material_at(row, col);
      f.top(row, col) = params.c(m, layout.material_at(row - 1, col));
      f.bottom(row, col) = params.c(m, layout.material_at(row + 1, col));
      f.left(row, col) = params.c(m, layout.material_at(row, col - 1));
      f.right(row, col) = params.c(m, layout.material_at(row, col + 1));
    }
  }
  return f;
}

PowerMap estimate_pixel_powers(const TemperatureMap& map, const ComponentLayout& layout,
                               const ModelParams& params, double t_amb) {
  if (!(t_amb > 0.0)) throw ValidationError("ambient temperature must be positive");
  if (map.height() != layout.height() || map.width() != layout.width()) {
    throw ValidationError("map and layout shapes differ");
  }
  const Variant variant = params.variant;
  const bool full = variant == Variant::Full;
  const bool radiative = variant == Variant::Full || variant == Variant::Int;
  const bool convective = variant != Variant::NoFlux;

  const TemperatureMap compensated =
      full ? compensate_emissivity(map, layout, params.emissivity, t_amb) : map;
  const Grid<double>& T = compensated.grid();
  const ConductanceFields C = conductance_fields(layout, params);
  const double amb4 = t_amb * t_amb * t_amb * t_amb;

  const std::size_t H = map.height();
  const std::size_t W = map.width();
  PowerMap out(H, W, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t row = 1; row + 1 < H; ++row) {
    for (std::size_t col = 1; col + 1 < W; ++col) {
      const double t0 = T(row, col);
      const double p_top = C.top(row, col) * (T(row - 1, col) - t0);
      const double p_bottom = C.bottom(row, col) * (T(row + 1, col) - t0);
      const double p_left = C.left(row, col) * (T(row, col - 1) - t0);
      const double p_right = C.right(row, col) * (T(row, col + 1) - t0);
      const double p_conv = convective ? params.h * (t_amb - t0) : 0.0;
      double p_rad = 0.0;
      if (radiative) {
        const double eps =
            full ? params.emissivity[static_cast<std::size_t>(layout.material_at(row, col))] : 1.0;
        p_rad = -params.r * eps * (t0 * t0 * t0 * t0 - amb4);
      }
      const double p_el = -(p_top + p_bottom + p_left + p_right) - p_conv - p_rad;
      if (!std::isfinite(p_el)) {
        throw ComputationError("non-finite power at row " + std::to_string(row) + ", column " +
                               std::to_string(col));
      }
      out(row, col) = p_el;
    }
  }
  return out;
}

}  // namespace thermopower
