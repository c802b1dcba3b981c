#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermopower/metrics.hpp"
#include "thermopower/types.hpp"

namespace thermopower {

/// One measurement instance reduced to what the estimator needs: the mean of
/// its readings preprocessed for the variant, and the ambient temperature
/// estimated from the raw mean map.
struct PreparedInstance {
  ComponentLayout layout;
  TemperatureMap map;
  double t_amb = 0.0;
  std::string config;
  int voltage_index = 0;
  double voltage = 0.0;
  std::vector<ComponentId> active;  // ascending
  std::vector<double> truth;        // aligned with `active`
  std::vector<std::size_t> board_cells;  // flat indices of interior board cells
  std::vector<std::size_t> wire_cells;   // flat indices of interior wire cells
};

struct PreparedMap {
  TemperatureMap map;
  double t_amb = 0.0;
};

/// Ambient temperature from the histogram of `map` unless `t_amb` is given,
/// then wire inpainting for every variant except Full.
PreparedMap prepare_map(const TemperatureMap& map, const ComponentLayout& layout, Variant variant,
                        std::optional<double> t_amb = std::nullopt);

/// Ambient estimate plus variant preprocessing (wire inpainting for
/// Int/NoRad/NoFlux; Full keeps the raw map and compensates inside the model).
PreparedInstance prepare_instance(const MeasurementInstance& instance, Variant variant);
std::vector<PreparedInstance> prepare_dataset(std::span<const MeasurementInstance> dataset,
                                              Variant variant);

/// Component estimates of one prepared instance, aligned with `active`.
std::vector<double> estimate_components(const PreparedInstance& instance, const ModelParams& params);

/// Fitting residuals. Per instance: one entry estimate - truth per active
/// component (ascending id), then sqrt(w) times the root of the pixel-wise
/// squared board power, then the same for the wire cells. The squared sum of
/// the vector is the training objective.
Eigen::VectorXd residuals(const ModelParams& params, std::span<const PreparedInstance> dataset,
                          double regularizer_weight = 1.0);
Eigen::VectorXd residuals(const ModelParams& params, std::span<const MeasurementInstance> dataset,
                          double regularizer_weight = 1.0);

struct ParameterBounds {
  double conductance_min = 0.0, conductance_max = 1e3;
  double emissivity_min = 0.01, emissivity_max = 1.0;
  double h_min = 0.0, h_max = 1e3;
  double r_min = 0.0, r_max = 1e-3;
};

/// Physical order-of-magnitude starting point for mu = 3 (board, wire, part).
ModelParams default_initial_params(Variant variant, int mu = 3);

struct FitProblem {
  std::vector<MeasurementInstance> dataset;
  Variant variant = Variant::Int;
  ModelParams initial = default_initial_params(Variant::Int);
  ParameterBounds bounds;
  int folds = 10;
  std::uint64_t seed = 0;
  int max_iterations = 500;
  double regularizer_weight = 1.0;
  int restarts = 0;  // extra seeded starts around `initial`; best objective wins

  /// Throws ValidationError when there are fewer instances than trained parameters.
  void validate() const;
};

struct FitResult {
  ModelParams params;
  double objective = 0.0;  // watts^2
  Eigen::VectorXd residuals;
  int iterations = 0;
  bool converged = false;
  bool rank_deficient = false;
  std::vector<double> objective_trace;
  std::string stop_reason;
};

/// The trained parameters of a variant as a flat vector, and back. Pinned
/// parameters (eps = 1 for Int/NoRad/NoFlux, r = 0 for NoRad/NoFlux,
/// h = 0 for NoFlux) are restored by `unpack`.
std::vector<double> pack_parameters(const ModelParams& params, Variant variant);
ModelParams unpack_parameters(std::span<const double> values, const ModelParams& base, Variant variant);

FitResult fit_parameters(const FitProblem& problem);
/// Same as fit_parameters on an already prepared dataset.
FitResult fit_prepared(const FitProblem& problem, std::span<const PreparedInstance> prepared);

struct FoldResult {
  std::size_t train_count = 0;
  std::size_t validate_count = 0;
  FitResult fit;
  std::optional<ErrorSummary> validation;
  std::vector<PowerSample> predictions;
};

struct CrossValidation {
  std::vector<FoldResult> folds;
  std::optional<ErrorSummary> pooled;
  std::vector<PowerSample> predictions;  // all validation predictions, canonical order
};

/// Fold membership (fold index per instance) over the canonical instance order
/// (configuration label, then voltage index). Deterministic in the seed.
std::vector<int> assign_folds(std::size_t count, int folds, std::uint64_t seed);

/// k-fold cross-validation over whole instances (readings never split).
CrossValidation cross_validate(const FitProblem& problem);

/// Predictions of `params` on every active component of every instance.
std::vector<PowerSample> predict(const ModelParams& params, std::span<const PreparedInstance> dataset);

/// Instances sorted by (configuration label, voltage index).
std::vector<MeasurementInstance> canonical_order(std::vector<MeasurementInstance> dataset);

}  // namespace thermopower
