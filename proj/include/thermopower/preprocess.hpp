#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "thermopower/types.hpp"

namespace thermopower {

struct AmbientEstimate {
  double t_amb = 0.0;       // kelvin
  double bin_width = 0.0;   // kelvin; 0 for a constant map
  std::size_t peak_bin = 0;
};

/// Ambient temperature from the histogram of map values over [min, max].
///
/// The peak bin and its two neighbours (clipped at the histogram edges)
/// contribute their centre temperatures weighted by their counts. Ties
/// between equally full bins resolve to the coldest one.
AmbientEstimate estimate_ambient(const TemperatureMap& map, std::size_t bins = 100);

/// True temperature of a grey body seen against an enclosure at t_box:
/// T_out^4 = (T_in^4 - (1 - eps) * t_box^4) / eps, per cell material.
/// `emissivity` is indexed by zero-based material. Cells with eps == 1 are
/// copied unchanged. Throws ComputationError on a negative radicand.
TemperatureMap compensate_emissivity(const TemperatureMap& map, const ComponentLayout& layout,
                                     std::span<const double> emissivity, double t_box);

/// Forward radiometric model: the temperature a camera reports for a surface
/// at `true_temperature` with emissivity eps inside an enclosure at t_box.
double apparent_temperature(double true_temperature, double eps, double t_box);

/// Replaces the cells of the given materials (1-based) and their 4-neighbours
/// with a smooth fill that minimises the discrete squared Laplacian, using all
/// other cells as boundary data. Known cells are returned bit-identical.
/// Throws ValidationError when the known cells cannot pin the fill.
TemperatureMap inpaint_low_emissivity(const TemperatureMap& map, const ComponentLayout& layout,
                                      std::span<const int> low_emissivity_materials);

/// The cells inpaint_low_emissivity treats as unknown.
Grid<unsigned char> inpaint_region(const ComponentLayout& layout,
                                   std::span<const int> low_emissivity_materials);

}  // namespace thermopower
