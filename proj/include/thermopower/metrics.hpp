#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermopower/types.hpp"

namespace thermopower {

/// Sum of the interior-cell powers of one component. Border cells are skipped.
double aggregate(const PowerMap& power, const ComponentLayout& layout, ComponentId id);

struct ComponentPowerReport {
  std::string config;
  double voltage = 0.0;
  std::map<ComponentId, double> estimates;  // every manifest id, watts
  double board = 0.0;                       // same as estimates[0]
  double wire = 0.0;                        // summed over all wire ids
};

ComponentPowerReport component_report(const PowerMap& power, const ComponentLayout& layout,
                                      std::string config = {}, double voltage = 0.0);

/// One (estimate, truth) pair for component k at voltage i of configuration l.
struct PowerSample {
  std::string config;
  int voltage_index = 0;
  ComponentId component = 0;
  double estimate = 0.0;  // watts
  double truth = 0.0;     // watts
};

struct ErrorSummary {
  double e_std = 0.0;  // watts
  double e_rel = 0.0;  // fraction
  std::size_t samples = 0;
  double p_min = 0.0;  // watts
};

/// Root of the configuration-averaged mean squared error: each configuration
/// weighs equally regardless of its sample count. Samples with truth below
/// `p_min` are dropped first; configurations left empty do not count.
/// Returns nullopt when nothing survives the filter.
std::optional<double> error_std(std::span<const PowerSample> samples, double p_min = 0.0);

/// Configuration-averaged mean of |estimate - truth| / truth over samples with
/// truth >= p_min. Returns nullopt when nothing survives the filter; throws
/// ValidationError if a surviving truth is not positive.
std::optional<double> error_rel(std::span<const PowerSample> samples, double p_min = 0.0);

/// Both metrics at one threshold; nullopt when no sample survives.
std::optional<ErrorSummary> summarize(std::span<const PowerSample> samples, double p_min = 0.0);

struct SweepPoint {
  double p_min = 0.0;
  std::optional<ErrorSummary> summary;  // nullopt: no samples at this threshold
};

/// Metrics at each threshold of an ascending grid (watts).
std::vector<SweepPoint> min_power_sweep(std::span<const PowerSample> samples,
                                        std::span<const double> p_min_grid);

/// Estimates of one instance: readings x components (same component order in
/// every reading).
using ReadingEstimates = std::vector<std::vector<double>>;

struct SpreadSummary {
  std::vector<double> per_instance;  // watts
  double mean = 0.0;
  double max = 0.0;
};

/// Per-instance spread: root of the mean over components of the sample
/// variance across readings. Throws ValidationError with fewer than two readings.
SpreadSummary spread(std::span<const ReadingEstimates> instances);

}  // namespace thermopower
