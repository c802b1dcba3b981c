#include "thermopower/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "thermopower/error.hpp"
#include "thermopower/powerflow.hpp"
#include "thermopower/preprocess.hpp"

namespace thermopower {

void Scenario::validate() const {
  params.validate();
  if (params.mu != layout.mu()) throw ValidationError("scenario layout and parameters disagree on mu");
  if (!(t_amb > 0.0)) throw ValidationError("ambient temperature must be positive");
  if (!(sigma >= 0.0)) throw ValidationError("noise sigma must be >= 0");
  if (readings < 1) throw ValidationError("readings must be >= 1");
  for (const auto& [id, p] : injections) {
    if (!layout.contains(id)) throw ValidationError("injection for unknown component " + std::to_string(id));
    if (!(p >= 0.0)) throw ValidationError("injections must be >= 0");
  }
}

Grid<double> injection_field(const ComponentLayout& layout,
                             const std::map<ComponentId, double>& injections) {
  std::map<ComponentId, std::size_t> cells;
  for (std::size_t row = 1; row + 1 < layout.height(); ++row) {
    for (std::size_t col = 1; col + 1 < layout.width(); ++col) cells[layout.id_at(row, col)]++;
  }
  Grid<double> field(layout.height(), layout.width(), 0.0);
  for (const auto& [id, p] : injections) {
    if (p == 0.0) continue;
    if (!cells.contains(id)) {
      throw ValidationError("component " + std::to_string(id) + " has no interior cells to inject into");
    }
  }
  for (std::size_t row = 1; row + 1 < layout.height(); ++row) {
    for (std::size_t col = 1; col + 1 < layout.width(); ++col) {
      const ComponentId id = layout.id_at(row, col);
      const auto it = injections.find(id);
      if (it != injections.end()) field(row, col) = it->second / static_cast<double>(cells.at(id));
    }
  }
  return field;
}

double ohmic_power(double volts, double ohms) {
  if (!(ohms > 0.0)) throw ValidationError("resistance must be positive");
  return volts * volts / ohms;
}

double resistor_power(double volts, double ohms, double series_ohms) {
  if (series_ohms == 0.0) return ohmic_power(volts, ohms);
  if (!(ohms > 0.0) || series_ohms < 0.0) throw ValidationError("invalid resistance");
  const double current = volts / (ohms + series_ohms);
  return current * current * ohms;
}

namespace {

struct Balance {
  const Scenario& s;
  ConductanceFields c;
  Grid<double> injection;
  std::vector<double> eps;  // per zero-based material

  explicit Balance(const Scenario& scenario)
      : s(scenario),
        c(conductance_fields(scenario.layout, scenario.params)),
        injection(injection_field(scenario.layout, scenario.injections)),
        eps(scenario.params.emissivity) {}

  double emissivity(std::size_t row, std::size_t col) const {
    return eps[static_cast<std::size_t>(s.layout.material_at(row, col))];
  }

  // Net inflow into an interior cell.
  double residual(const Grid<double>& T, std::size_t row, std::size_t col) const {
    const double t0 = T(row, col);
    const double amb4 = s.t_amb * s.t_amb * s.t_amb * s.t_amb;
    const double conduction = c.top(row, col) * (T(row - 1, col) - t0) +
                              c.bottom(row, col) * (T(row + 1, col) - t0) +
                              c.left(row, col) * (T(row, col - 1) - t0) +
                              c.right(row, col) * (T(row, col + 1) - t0);
    const double convection = s.params.h * (s.t_amb - t0);
    const double radiation = -s.params.r * emissivity(row, col) * (t0 * t0 * t0 * t0 - amb4);
    return injection(row, col) + conduction + convection + radiation;
  }
};

}  // namespace

Grid<double> balance_residual(const Scenario& scenario, const TemperatureMap& temperature) {
  const Balance balance(scenario);
  Grid<double> out(temperature.height(), temperature.width(), 0.0);
  for (std::size_t row = 1; row + 1 < out.height(); ++row) {
    for (std::size_t col = 1; col + 1 < out.width(); ++col) {
      out(row, col) = balance.residual(temperature.grid(), row, col);
    }
  }
  return out;
}

SteadyState solve_steady_state(const Scenario& scenario, const SolverOptions& options) {
  scenario.validate();
  const std::size_t H = scenario.layout.height();
  const std::size_t W = scenario.layout.width();
  const Balance balance(scenario);

  std::vector<int> unknown(H * W, -1);
  int n = 0;
  for (std::size_t row = 1; row + 1 < H; ++row) {
    for (std::size_t col = 1; col + 1 < W; ++col) unknown[row * W + col] = n++;
  }

  Grid<double> T(H, W, scenario.t_amb);
  auto max_residual = [&] {
    double worst = 0.0;
    for (std::size_t row = 1; row + 1 < H; ++row) {
      for (std::size_t col = 1; col + 1 < W; ++col) {
        worst = std::max(worst, std::abs(balance.residual(T, row, col)));
      }
    }
    return worst;
  };

  // Newton on the balance. The negated Jacobian is symmetric positive
  // definite (Dirichlet ring plus non-negative sinks), so LDLT applies. The
  // first step from T = t_amb with the radiative slope at t_amb is the
  // linearised solve.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool analysed = false;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * 5);
  Eigen::VectorXd rhs(n);
  double worst = max_residual();
  int iteration = 0;
  while (worst >= options.tolerance) {
    if (iteration == options.max_iterations) {
      throw ComputationError("steady-state solve did not converge in " +
                             std::to_string(options.max_iterations) +
                             " iterations; max residual " + std::to_string(worst) + " W");
    }
    triplets.clear();
    for (std::size_t row = 1; row + 1 < H; ++row) {
      for (std::size_t col = 1; col + 1 < W; ++col) {
        const int i = unknown[row * W + col];
        const double t0 = T(row, col);
        const double rad_slope =
            4.0 * scenario.params.r * balance.emissivity(row, col) * t0 * t0 * t0;
        const double ct = balance.c.top(row, col), cb = balance.c.bottom(row, col);
        const double cl = balance.c.left(row, col), cr = balance.c.right(row, col);
        triplets.emplace_back(i, i, ct + cb + cl + cr + scenario.params.h + rad_slope);
        const std::pair<int, double> neighbours[] = {{unknown[(row - 1) * W + col], ct},
                                                     {unknown[(row + 1) * W + col], cb},
                                                     {unknown[row * W + col - 1], cl},
                                                     {unknown[row * W + col + 1], cr}};
        for (const auto& [j, cond] : neighbours) {
          if (j >= 0 && cond != 0.0) triplets.emplace_back(i, j, -cond);
        }
        rhs[i] = balance.residual(T, row, col);
      }
    }
    Eigen::SparseMatrix<double> jac(n, n);
    jac.setFromTriplets(triplets.begin(), triplets.end());
    if (!analysed) {
      solver.analyzePattern(jac);
      analysed = true;
    }
    solver.factorize(jac);
    if (solver.info() != Eigen::Success) {
      throw ComputationError("steady-state system is singular; the board needs a heat sink "
                             "(h, r or conduction to the border)");
    }
    const Eigen::VectorXd step = solver.solve(rhs);
    for (std::size_t row = 1; row + 1 < H; ++row) {
      for (std::size_t col = 1; col + 1 < W; ++col) T(row, col) += step[unknown[row * W + col]];
    }
    ++iteration;
    const double next = max_residual();
    if (!std::isfinite(next)) throw ComputationError("steady-state solve diverged");
    worst = next;
  }
  return {TemperatureMap(std::move(T)), worst, iteration};
}

std::uint64_t reading_seed(std::uint64_t seed, std::uint64_t instance, std::uint64_t reading) {
  // splitmix64 over the three coordinates
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(mix(mix(seed) ^ instance) ^ reading);
}

TemperatureMap synthesize_observation(const TemperatureMap& true_temperature,
                                      const ComponentLayout& layout,
                                      std::span<const double> emissivity, double t_box,
                                      double sigma, std::uint64_t seed) {
  if (emissivity.size() != static_cast<std::size_t>(layout.mu())) {
    throw ValidationError("emissivity vector length differs from the layout's mu");
  }
  if (!(sigma >= 0.0)) throw ValidationError("noise sigma must be >= 0");
  Grid<double> out = true_temperature.grid();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t row = 0; row < out.height(); ++row) {
    for (std::size_t col = 0; col < out.width(); ++col) {
      const double eps = emissivity[static_cast<std::size_t>(layout.material_at(row, col))];
      double t = apparent_temperature(out(row, col), eps, t_box);
      if (sigma > 0.0) t += sigma * noise(rng);
      out(row, col) = t;
    }
  }
  return TemperatureMap(std::move(out));
}

std::vector<MeasurementInstance> generate_dataset(std::span<const ResistorConfiguration> configs,
                                                  std::span<const double> voltages) {
  std::vector<MeasurementInstance> out;
  std::uint64_t instance_index = 0;
  for (const auto& config : configs) {
    for (const ComponentId id : config.scenario.layout.active_ids()) {
      if (!config.resistances.contains(id)) {
        throw ValidationError("configuration " + config.label + ": no resistance for component " +
                              std::to_string(id));
      }
    }
    for (std::size_t v = 0; v < voltages.size(); ++v, ++instance_index) {
      Scenario scenario = config.scenario;
      scenario.injections.clear();
      std::map<ComponentId, double> truth;
      for (const auto& [id, ohms] : config.resistances) {
        const double p = resistor_power(voltages[v], ohms, config.series_resistance);
        scenario.injections[id] = p;
        truth[id] = p;
      }
      const SteadyState state = solve_steady_state(scenario);
      std::vector<TemperatureMap> maps;
      for (int k = 0; k < scenario.readings; ++k) {
        maps.push_back(synthesize_observation(
            state.temperature, scenario.layout, scenario.params.emissivity, scenario.t_amb,
            scenario.sigma, reading_seed(scenario.seed, instance_index, static_cast<std::uint64_t>(k))));
      }
      out.push_back(MeasurementInstance{std::move(maps), scenario.layout, voltages[v],
                                        std::move(truth), config.label, static_cast<int>(v)});
    }
  }
  return out;
}

}  // namespace thermopower
