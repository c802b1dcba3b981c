#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace thermopower {

struct LmOptions {
  int max_iterations = 500;
  double relative_decrease_tolerance = 1e-10;
  double gradient_tolerance = 1e-10;
  double fd_relative_step = 1e-6;
  double initial_damping = 1e-3;
};

struct LmResult {
  Eigen::VectorXd x;
  double objective = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
  bool rank_deficient = false;
  std::vector<double> objective_trace;  // initial value, then each accepted step
  std::string stop_reason;
};

/// Residual callback. Returning nullopt marks the point as infeasible; the
/// optimizer then treats it as a rejected step.
using ResidualFunction = std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd&)>;

/// Levenberg-Marquardt with Marquardt diagonal scaling, forward-difference
/// Jacobian and projection onto [lower, upper]. Variables pinned at a bound
/// whose gradient points outward are frozen for that step.
///
/// Stops when an accepted step lowers the objective by less than the relative
/// tolerance, when the projected gradient falls below the gradient tolerance,
/// or when no damping level yields a decrease. Throws ComputationError if
/// the residual cannot be evaluated at the (clamped) start point.
LmResult minimize_box(const ResidualFunction& residual, Eigen::VectorXd x0,
                      const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                      const LmOptions& options = {});

}  // namespace thermopower
