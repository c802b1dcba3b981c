#include "thermopower/fit.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <thread>
#include <tuple>

#include "thermopower/error.hpp"
#include "thermopower/lm.hpp"
#include "thermopower/powerflow.hpp"
#include "thermopower/preprocess.hpp"
#include "thermopower/simulator.hpp"

namespace thermopower {
namespace {

// Runs fn(i) for i in [0, n). Each index writes only its own output slot, so
// the result does not depend on the schedule.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Interior sums per component id, in row-major order (same as aggregate()).
std::vector<double> component_sums(const PowerMap& power, const PreparedInstance& inst) {
  const auto& layout = inst.layout;
  const int max_id = inst.layout.manifest().empty()
                         ? 0
                         : std::max_element(layout.manifest().begin(), layout.manifest().end(),
                                            [](const auto& a, const auto& b) { return a.id < b.id; })
                               ->id;
  std::vector<double> by_id(static_cast<std::size_t>(max_id) + 1, 0.0);
  for (std::size_t row = 1; row + 1 < power.height(); ++row) {
    for (std::size_t col = 1; col + 1 < power.width(); ++col) {
      by_id[static_cast<std::size_t>(layout.id_at(row, col))] += power(row, col);
    }
  }
  std::vector<double> out;
  out.reserve(inst.active.size());
  for (const ComponentId id : inst.active) out.push_back(by_id[static_cast<std::size_t>(id)]);
  return out;
}

enum class Slot { Conductance, Emissivity, H, R };

struct SlotInfo {
  Slot kind;
  int a = 0, b = 0;  // conductance pair or emissivity material
};

std::vector<SlotInfo> slots(Variant variant, int mu) {
  std::vector<SlotInfo> out;
  for (int a = 0; a < mu; ++a) {
    for (int b = a; b < mu; ++b) out.push_back({Slot::Conductance, a, b});
  }
  if (variant == Variant::Full) {
    for (int m = 0; m < mu; ++m) out.push_back({Slot::Emissivity, m, m});
  }
  if (variant != Variant::NoFlux) out.push_back({Slot::H});
  if (variant == Variant::Full || variant == Variant::Int) out.push_back({Slot::R});
  return out;
}

double typical_scale(Slot kind) {
  switch (kind) {
    case Slot::Conductance: return 1e-2;
    case Slot::Emissivity: return 1.0;
    case Slot::H: return 1e-3;
    case Slot::R: return 1e-11;
  }
  return 1.0;
}

std::pair<double, double> slot_bounds(Slot kind, const ParameterBounds& b) {
  switch (kind) {
    case Slot::Conductance: return {b.conductance_min, b.conductance_max};
    case Slot::Emissivity: return {b.emissivity_min, b.emissivity_max};
    case Slot::H: return {b.h_min, b.h_max};
    case Slot::R: return {b.r_min, b.r_max};
  }
  return {0.0, 0.0};
}

struct Layout {
  std::vector<Eigen::Index> offset;  // start of each instance's entries
  Eigen::Index size = 0;
};

Layout expanded_layout(std::span<const PreparedInstance> dataset) {
  Layout l;
  for (const auto& inst : dataset) {
    l.offset.push_back(l.size);
    l.size += static_cast<Eigen::Index>(inst.active.size() + inst.board_cells.size() +
                                        inst.wire_cells.size());
  }
  return l;
}

// Objective vector with one entry per regularised pixel. Its squared norm
// equals that of the compact residuals().
Eigen::VectorXd expanded_residuals(const ModelParams& params, std::span<const PreparedInstance> dataset,
                                   const Layout& layout, double weight) {
  Eigen::VectorXd out(layout.size);
  const double sw = std::sqrt(weight);
  parallel_for(dataset.size(), [&](std::size_t i) {
    const auto& inst = dataset[i];
    const PowerMap power = estimate_pixel_powers(inst.map, inst.layout, params, inst.t_amb);
    Eigen::Index k = layout.offset[i];
    const auto sums = component_sums(power, inst);
    for (std::size_t c = 0; c < sums.size(); ++c) out[k++] = sums[c] - inst.truth[c];
    for (const std::size_t cell : inst.board_cells) out[k++] = sw * power.values()[cell];
    for (const std::size_t cell : inst.wire_cells) out[k++] = sw * power.values()[cell];
  });
  return out;
}

}  // namespace

PreparedMap prepare_map(const TemperatureMap& map, const ComponentLayout& layout, Variant variant,
                        std::optional<double> known_t_amb) {
  if (known_t_amb && !(*known_t_amb > 0.0)) throw ValidationError("ambient temperature must be > 0 K");
  const double t_amb = known_t_amb ? *known_t_amb : estimate_ambient(map).t_amb;
  if (variant == Variant::Full) return {map, t_amb};
  const int wire[] = {kWireMaterial};
  return {inpaint_low_emissivity(map, layout, wire), t_amb};
}

PreparedInstance prepare_instance(const MeasurementInstance& instance, Variant variant) {
  instance.validate();
  PreparedMap prepared = prepare_map(instance.mean_map(), instance.layout, variant);
  PreparedInstance out{instance.layout, std::move(prepared.map), prepared.t_amb, instance.config,
                       instance.voltage_index, instance.voltage, {}, {}, {}, {}};
  out.active = instance.layout.active_ids();
  for (const ComponentId id : out.active) out.truth.push_back(instance.truth.at(id));
  const auto& layout = instance.layout;
  for (std::size_t row = 1; row + 1 < layout.height(); ++row) {
    for (std::size_t col = 1; col + 1 < layout.width(); ++col) {
      const ComponentId id = layout.id_at(row, col);
      const std::size_t flat = row * layout.width() + col;
      if (id == kBoardId) {
        out.board_cells.push_back(flat);
      } else if (layout.is_wire(id)) {
        out.wire_cells.push_back(flat);
      }
    }
  }
  return out;
}

std::vector<PreparedInstance> prepare_dataset(std::span<const MeasurementInstance> dataset,
                                              Variant variant) {
  std::vector<PreparedInstance> out;
  out.reserve(dataset.size());
  for (const auto& inst : dataset) out.push_back(prepare_instance(inst, variant));
  return out;
}

std::vector<double> estimate_components(const PreparedInstance& instance, const ModelParams& params) {
  return component_sums(estimate_pixel_powers(instance.map, instance.layout, params, instance.t_amb),
                        instance);
}

Eigen::VectorXd residuals(const ModelParams& params, std::span<const PreparedInstance> dataset,
                          double regularizer_weight) {
  Eigen::Index size = 0;
  for (const auto& inst : dataset) size += static_cast<Eigen::Index>(inst.active.size() + 2);
  Eigen::VectorXd out(size);
  const double sw = std::sqrt(regularizer_weight);
  Eigen::Index k = 0;
  for (const auto& inst : dataset) {
    if (inst.truth.size() != inst.active.size()) throw ValidationError("truth and component lists differ");
    const PowerMap power = estimate_pixel_powers(inst.map, inst.layout, params, inst.t_amb);
    const auto sums = component_sums(power, inst);
    for (std::size_t c = 0; c < sums.size(); ++c) out[k++] = sums[c] - inst.truth[c];
    double board = 0.0;
    for (const std::size_t cell : inst.board_cells) board += power.values()[cell] * power.values()[cell];
    double wire = 0.0;
    for (const std::size_t cell : inst.wire_cells) wire += power.values()[cell] * power.values()[cell];
    out[k++] = sw * std::sqrt(board);
    out[k++] = sw * std::sqrt(wire);
  }
  return out;
}

Eigen::VectorXd residuals(const ModelParams& params, std::span<const MeasurementInstance> dataset,
                          double regularizer_weight) {
  const auto prepared = prepare_dataset(dataset, params.variant);
  return residuals(params, std::span<const PreparedInstance>(prepared), regularizer_weight);
}

ModelParams default_initial_params(Variant variant, int mu) {
  ModelParams p = ModelParams::uniform(mu, 1e-2, 0.95, 1e-3, 1e-11, variant);
  if (mu >= kWireMaterial) p.emissivity[kWireMaterial - 1] = 0.2;
  return p;
}

void FitProblem::validate() const {
  initial.validate();
  const std::size_t needed = trained_parameter_count(variant, initial.mu);
  if (dataset.size() < needed) {
    throw ValidationError("under-determined fit: " + std::to_string(dataset.size()) +
                          " instances for " + std::to_string(needed) + " trained parameters (" +
                          std::string(to_string(variant)) + ")");
  }
  for (const auto& inst : dataset) {
    if (inst.layout.mu() != initial.mu) throw ValidationError("dataset layouts disagree with mu");
  }
  if (regularizer_weight < 0.0) throw ValidationError("regularizer weight must be >= 0");
}

std::vector<double> pack_parameters(const ModelParams& params, Variant variant) {
  std::vector<double> out;
  for (const auto& s : slots(variant, params.mu)) {
    switch (s.kind) {
      case Slot::Conductance: out.push_back(params.c(s.a, s.b)); break;
      case Slot::Emissivity: out.push_back(params.emissivity[static_cast<std::size_t>(s.a)]); break;
      case Slot::H: out.push_back(params.h); break;
      case Slot::R: out.push_back(params.r); break;
    }
  }
  return out;
}

ModelParams unpack_parameters(std::span<const double> values, const ModelParams& base, Variant variant) {
  ModelParams p = base;
  p.variant = variant;
  if (variant != Variant::Full) std::fill(p.emissivity.begin(), p.emissivity.end(), 1.0);
  if (variant == Variant::NoRad || variant == Variant::NoFlux) p.r = 0.0;
  if (variant == Variant::NoFlux) p.h = 0.0;
  const auto layout = slots(variant, base.mu);
  if (values.size() != layout.size()) throw ValidationError("parameter vector has the wrong length");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& s = layout[i];
    switch (s.kind) {
      case Slot::Conductance: p.set_c(s.a, s.b, values[i]); break;
      case Slot::Emissivity: p.emissivity[static_cast<std::size_t>(s.a)] = values[i]; break;
      case Slot::H: p.h = values[i]; break;
      case Slot::R: p.r = values[i]; break;
    }
  }
  return p;
}

FitResult fit_prepared(const FitProblem& problem, std::span<const PreparedInstance> prepared) {
  const Variant variant = problem.variant;
  const auto layout_slots = slots(variant, problem.initial.mu);
  const auto n = static_cast<Eigen::Index>(layout_slots.size());
  if (prepared.size() < static_cast<std::size_t>(n)) {
    throw ValidationError("under-determined fit: " + std::to_string(prepared.size()) +
                          " instances for " + std::to_string(n) + " trained parameters (" +
                          std::string(to_string(variant)) + ")");
  }

  // Optimise in units of each parameter's starting magnitude.
  const ModelParams base = unpack_parameters(pack_parameters(problem.initial, variant), problem.initial, variant);
  const auto start = pack_parameters(base, variant);
  Eigen::VectorXd scale(n), lower(n), upper(n), x0(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& s = layout_slots[static_cast<std::size_t>(j)];
    scale[j] = start[static_cast<std::size_t>(j)] != 0.0 ? std::abs(start[static_cast<std::size_t>(j)])
                                                         : typical_scale(s.kind);
    const auto [lo, hi] = slot_bounds(s.kind, problem.bounds);
    lower[j] = lo / scale[j];
    upper[j] = hi / scale[j];
    x0[j] = start[static_cast<std::size_t>(j)] / scale[j];
  }
  auto to_params = [&](const Eigen::VectorXd& x) {
    std::vector<double> values(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) values[static_cast<std::size_t>(j)] = x[j] * scale[j];
    return unpack_parameters(values, base, variant);
  };

  const Layout rows = expanded_layout(prepared);
  const ResidualFunction objective = [&](const Eigen::VectorXd& x) -> std::optional<Eigen::VectorXd> {
    try {
      Eigen::VectorXd r = expanded_residuals(to_params(x), prepared, rows, problem.regularizer_weight);
      if (!r.allFinite()) return std::nullopt;
      return r;
    } catch (const ComputationError&) {
      return std::nullopt;
    }
  };

  LmOptions options;
  options.max_iterations = problem.max_iterations;
  LmResult best = minimize_box(objective, x0, lower, upper, options);
  std::mt19937_64 rng(reading_seed(problem.seed, 0x5eed, 0));
  std::uniform_real_distribution<double> jitter(-std::log(3.0), std::log(3.0));
  for (int k = 0; k < problem.restarts; ++k) {
    Eigen::VectorXd xk = x0;
    for (Eigen::Index j = 0; j < n; ++j) xk[j] *= std::exp(jitter(rng));
    LmResult candidate = minimize_box(objective, xk, lower, upper, options);
    if (candidate.objective < best.objective) best = std::move(candidate);
  }

  FitResult out;
  out.params = to_params(best.x);
  out.objective = best.objective;
  out.residuals = residuals(out.params, prepared, problem.regularizer_weight);
  out.iterations = best.iterations;
  out.converged = best.converged;
  out.rank_deficient = best.rank_deficient;
  out.objective_trace = std::move(best.objective_trace);
  out.stop_reason = std::move(best.stop_reason);
  return out;
}

std::vector<MeasurementInstance> canonical_order(std::vector<MeasurementInstance> dataset) {
  std::stable_sort(dataset.begin(), dataset.end(), [](const auto& a, const auto& b) {
    return std::tie(a.config, a.voltage_index) < std::tie(b.config, b.voltage_index);
  });
  return dataset;
}

FitResult fit_parameters(const FitProblem& problem) {
  problem.validate();
  const auto ordered = canonical_order(problem.dataset);
  const auto prepared = prepare_dataset(ordered, problem.variant);
  return fit_prepared(problem, prepared);
}

std::vector<int> assign_folds(std::size_t count, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
  if (count < static_cast<std::size_t>(folds)) {
    throw ValidationError(std::to_string(count) + " instances cannot fill " + std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  std::mt19937_64 rng(reading_seed(seed, 0xf01d, 0));
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<int> fold(count, 0);
  for (std::size_t pos = 0; pos < count; ++pos) {
    fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  }
  return fold;
}

std::vector<PowerSample> predict(const ModelParams& params, std::span<const PreparedInstance> dataset) {
  std::vector<PowerSample> out;
  for (const auto& inst : dataset) {
    const auto est = estimate_components(inst, params);
    for (std::size_t c = 0; c < inst.active.size(); ++c) {
      out.push_back({inst.config, inst.voltage_index, inst.active[c], est[c], inst.truth[c]});
    }
  }
  return out;
}

CrossValidation cross_validate(const FitProblem& problem) {
  problem.validate();
  const auto ordered = canonical_order(problem.dataset);
  const auto prepared = prepare_dataset(ordered, problem.variant);
  const auto fold_of = assign_folds(prepared.size(), problem.folds, problem.seed);
  const std::size_t needed = trained_parameter_count(problem.variant, problem.initial.mu);

  CrossValidation out;
  std::vector<std::vector<PowerSample>> per_instance(prepared.size());
  for (int f = 0; f < problem.folds; ++f) {
    std::vector<PreparedInstance> train, validate;
    std::vector<std::size_t> validate_index;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      if (fold_of[i] == f) {
        validate.push_back(prepared[i]);
        validate_index.push_back(i);
      } else {
        train.push_back(prepared[i]);
      }
    }
    if (train.size() < needed) {
      throw ValidationError("fold " + std::to_string(f) + " trains on " + std::to_string(train.size()) +
                            " instances, fewer than the " + std::to_string(needed) +
                            " trained parameters");
    }
    FoldResult fold;
    fold.train_count = train.size();
    fold.validate_count = validate.size();
    fold.fit = fit_prepared(problem, train);
    fold.predictions = predict(fold.fit.params, validate);
    fold.validation = summarize(fold.predictions);
    for (std::size_t v = 0; v < validate.size(); ++v) {
      per_instance[validate_index[v]] = predict(fold.fit.params, std::span(&validate[v], 1));
    }
    out.folds.push_back(std::move(fold));
  }
  for (auto& p : per_instance) out.predictions.insert(out.predictions.end(), p.begin(), p.end());
  out.pooled = summarize(out.predictions);
  return out;
}

}  // namespace thermopower
