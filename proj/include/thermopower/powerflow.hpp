#pragma once

#include "thermopower/types.hpp"

namespace thermopower {

/// Per-cell conductances toward each of the four neighbours. Only interior
/// cells are filled; border cells stay 0.
struct ConductanceFields {
  Grid<double> top, bottom, left, right;
};

ConductanceFields conductance_fields(const ComponentLayout& layout, const ModelParams& params);

/// Pixel-wise electrical power from a steady-state temperature map.
///
/// Every flow is booked as power received by the cell: conduction from each
/// neighbour C_d (T_d - T0), convection h (T_amb - T0) and radiation
/// -r eps (T0^4 - T_amb^4). The electrical power is the negated sum, so a
/// cell hotter than its surroundings reports a positive value.
///
/// `params.variant` selects the model:
///   Full   compensates emissivity with T_box = t_amb, all terms active
///   Int    uses the map as given (inpaint upstream) with eps = 1
///   NoRad  Int without the radiative term
///   NoFlux NoRad without the convective term
///
/// Border cells of the result are NaN.
PowerMap estimate_pixel_powers(const TemperatureMap& map, const ComponentLayout& layout,
                               const ModelParams& params, double t_amb);

}  // namespace thermopower
