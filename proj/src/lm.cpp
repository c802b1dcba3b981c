#include "thermopower/lm.hpp"

#include <algorithm>
#include <cmath>

#include "thermopower/error.hpp"

namespace thermopower {
namespace {

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// Forward differences; steps backwards when the forward point leaves the box
// or cannot be evaluated.
std::optional<Eigen::MatrixXd> jacobian(const ResidualFunction& residual, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& r0, const Eigen::VectorXd& lo,
                                        const Eigen::VectorXd& hi, double rel_step) {
  Eigen::MatrixXd J(r0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = rel_step * std::max(std::abs(x[j]), 1.0);
    std::optional<Eigen::VectorXd> r;
    double used = step;
    if (x[j] + step <= hi[j]) {
      Eigen::VectorXd xp = x;
      xp[j] += step;
      used = xp[j] - x[j];
      r = residual(xp);
    }
    if (!r && x[j] - step >= lo[j]) {
      Eigen::VectorXd xm = x;
      xm[j] -= step;
      used = xm[j] - x[j];
      r = residual(xm);
    }
    if (!r) return std::nullopt;
    J.col(j) = (*r - r0) / used;
  }
  return J;
}

}  // namespace

LmResult minimize_box(const ResidualFunction& residual, Eigen::VectorXd x0,
                      const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                      const LmOptions& options) {
  const Eigen::Index n = x0.size();
  LmResult out;
  out.x = clamp(x0, lower, upper);
  auto r0 = residual(out.x);
  if (!r0) throw ComputationError("residuals cannot be evaluated at the starting point");
  Eigen::VectorXd r = std::move(*r0);
  out.objective = r.squaredNorm();
  out.objective_trace.push_back(out.objective);

  double lambda = options.initial_damping;
  while (true) {
    if (out.objective == 0.0) {
      out.converged = true;
      out.stop_reason = "zero objective";
      break;
    }
    if (out.iterations >= options.max_iterations) {
      out.stop_reason = "iteration budget exhausted";
      break;
    }
    const auto J = jacobian(residual, out.x, r, lower, upper, options.fd_relative_step);
    if (!J) {
      out.stop_reason = "jacobian could not be evaluated";
      break;
    }
    const Eigen::VectorXd g = J->transpose() * r;

    std::vector<Eigen::Index> free;
    double pg_norm = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool blocked = (out.x[j] <= lower[j] && g[j] > 0.0) || (out.x[j] >= upper[j] && g[j] < 0.0);
      if (!blocked) {
        free.push_back(j);
        pg_norm = std::max(pg_norm, std::abs(g[j]));
      }
    }
    if (pg_norm < options.gradient_tolerance) {
      out.converged = true;
      out.stop_reason = "projected gradient below tolerance";
      break;
    }

    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd Jf(J->rows(), nf);
    for (Eigen::Index k = 0; k < nf; ++k) Jf.col(k) = J->col(free[static_cast<std::size_t>(k)]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Jf);
    qr.setThreshold(1e-12);
    out.rank_deficient = qr.rank() < nf;
    const Eigen::MatrixXd A = Jf.transpose() * Jf;
    Eigen::VectorXd gf(nf);
    for (Eigen::Index k = 0; k < nf; ++k) gf[k] = g[free[static_cast<std::size_t>(k)]];
    Eigen::VectorXd diag = A.diagonal();
    const double diag_floor = 1e-12 * std::max(diag.maxCoeff(), 1e-300);
    diag = diag.cwiseMax(diag_floor);

    bool accepted = false;
    bool small_decrease = false;
    while (lambda <= 1e16) {
      Eigen::MatrixXd damped = A;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd step = damped.ldlt().solve(-gf);
      Eigen::VectorXd candidate = out.x;
      for (Eigen::Index k = 0; k < nf; ++k) candidate[free[static_cast<std::size_t>(k)]] += step[k];
      candidate = clamp(candidate, lower, upper);
      if (step.allFinite() && candidate != out.x) {
        if (auto rc = residual(candidate)) {
          const double f = rc->squaredNorm();
          if (std::isfinite(f) && f < out.objective) {
            small_decrease = (out.objective - f) < options.relative_decrease_tolerance * out.objective;
            out.x = candidate;
            r = std::move(*rc);
            out.objective = f;
            out.objective_trace.push_back(f);
            lambda = std::max(lambda / 3.0, 1e-12);
            accepted = true;
            break;
          }
        }
      }
      lambda *= 4.0;
    }
    ++out.iterations;
    if (!accepted) {
      out.converged = true;
      out.stop_reason = "no damping level decreases the objective";
      break;
    }
    if (small_decrease) {
      out.converged = true;
      out.stop_reason = "relative decrease below tolerance";
      break;
    }
  }
  return out;
}

}  // namespace thermopower
