#pragma once

#include <optional>
#include <string>
#include <vector>

#include "thermopower/metrics.hpp"
#include "thermopower/types.hpp"

namespace thermopower {

/// Heatmap of a power map, one rect per cell. Border (NaN) cells are grey;
/// the colour scale is symmetric around 0 W.
std::string power_map_svg(const PowerMap& power, const std::string& title = {});

/// Relative error (left axis, percent) and standard error (right axis, mW)
/// over the minimum-power threshold. Thresholds without samples leave a gap.
std::string sweep_svg(const std::vector<SweepPoint>& sweep);

}  // namespace thermopower
