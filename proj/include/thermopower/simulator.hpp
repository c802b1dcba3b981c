#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "thermopower/types.hpp"

namespace thermopower {

/// Forward problem: a board with known per-component power injections.
struct Scenario {
  ComponentLayout layout;
  ModelParams params;  // generating values; the variant is ignored
  double t_amb = 300.15;
  std::map<ComponentId, double> injections;  // watts per component
  double sigma = 0.0;                        // sensor noise, kelvin
  int readings = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-cell injected power: each component's total split evenly over its
/// interior cells. Border cells carry 0.
Grid<double> injection_field(const ComponentLayout& layout,
                             const std::map<ComponentId, double>& injections);

/// Electrical power dissipated in a resistor: V^2 / R.
double ohmic_power(double volts, double ohms);

struct SolverOptions {
  double tolerance = 1e-10;  // max |residual| in watts
  int max_iterations = 100;
};

struct SteadyState {
  TemperatureMap temperature;
  double max_residual = 0.0;
  int iterations = 0;
};

/// Steady-state surface temperatures with the border ring held at t_amb.
/// Each interior cell balances injection, four-neighbour conduction,
/// convection and grey-body radiation. Throws ComputationError if Newton
/// does not reach the tolerance within the budget.
SteadyState solve_steady_state(const Scenario& scenario, const SolverOptions& options = {});

/// Net power flowing into each interior cell (injection included) at the
/// given temperatures; zero everywhere at a steady state. Border cells are 0.
Grid<double> balance_residual(const Scenario& scenario, const TemperatureMap& temperature);

/// What the camera sees: T_obs^4 = eps T^4 + (1 - eps) t_box^4 per cell, plus
/// i.i.d. Gaussian noise with standard deviation sigma (deterministic in seed).
TemperatureMap synthesize_observation(const TemperatureMap& true_temperature,
                                      const ComponentLayout& layout,
                                      std::span<const double> emissivity, double t_box,
                                      double sigma, std::uint64_t seed);

/// Seed of one reading, derived from the run seed and the reading's coordinates.
std::uint64_t reading_seed(std::uint64_t seed, std::uint64_t instance, std::uint64_t reading);

/// One resistor configuration driven through a voltage sweep.
struct ResistorConfiguration {
  std::string label;
  Scenario scenario;                          // injections are overwritten per voltage
  std::map<ComponentId, double> resistances;  // ohms, one per active component
  double series_resistance = 0.0;             // ohms in series with every resistor
};

/// Power in the resistor when `volts` drives it through the series resistance.
double resistor_power(double volts, double ohms, double series_ohms);

/// One instance per (configuration, voltage), each with `readings` noisy maps.
std::vector<MeasurementInstance> generate_dataset(std::span<const ResistorConfiguration> configs,
                                                  std::span<const double> voltages);

}  // namespace thermopower
