#include "thermopower/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "thermopower/error.hpp"

namespace thermopower {

AmbientEstimate estimate_ambient(const TemperatureMap& map, std::size_t bins) {
  if (bins < 3) throw ValidationError("ambient histogram needs at least 3 bins");
  const double lo = map.min();
  const double hi = map.max();
  if (hi == lo) return {lo, 0.0, 0};

  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (const double t : map.grid().values()) {
    auto b = static_cast<std::size_t>((t - lo) / width);
    counts[std::min(b, bins - 1)]++;
  }
  const auto peak = static_cast<std::size_t>(
      std::distance(counts.begin(), std::max_element(counts.begin(), counts.end())));
  const std::size_t first = peak == 0 ? 0 : peak - 1;
  const std::size_t last = std::min(peak + 1, bins - 1);

  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t b = first; b <= last; ++b) {
    const double centre = lo + (static_cast<double>(b) + 0.5) * width;
    weighted += centre * static_cast<double>(counts[b]);
    total += static_cast<double>(counts[b]);
  }
  return {weighted / total, width, peak};
}

double apparent_temperature(double true_temperature, double eps, double t_box) {
  if (eps == 1.0) return true_temperature;
  const double t4 = true_temperature * true_temperature * true_temperature * true_temperature;
  const double b4 = t_box * t_box * t_box * t_box;
  return std::sqrt(std::sqrt(eps * t4 + (1.0 - eps) * b4));
}

TemperatureMap compensate_emissivity(const TemperatureMap& map, const ComponentLayout& layout,
                                     std::span<const double> emissivity, double t_box) {
  if (!(t_box > 0.0)) throw ValidationError("box temperature must be positive");
  if (emissivity.size() != static_cast<std::size_t>(layout.mu())) {
    throw ValidationError("emissivity vector length differs from the layout's mu");
  }
  for (const double e : emissivity) {
    if (!(e > 0.0 && e <= 1.0)) throw ValidationError("emissivities must lie in (0, 1]");
  }
  const double b4 = t_box * t_box * t_box * t_box;
  Grid<double> out = map.grid();
  for (std::size_t row = 0; row < out.height(); ++row) {
    for (std::size_t col = 0; col < out.width(); ++col) {
      const double eps = emissivity[static_cast<std::size_t>(layout.material_at(row, col))];
      if (eps == 1.0) continue;
      const double t = out(row, col);
      const double radicand = (t * t * t * t - (1.0 - eps) * b4) / eps;
      if (radicand < 0.0) {
        throw ComputationError("emissivity compensation has a negative radicand at row " +
                               std::to_string(row) + ", column " + std::to_string(col) +
                               " (observed temperature too low for the given emissivity and box "
                               "temperature)");
      }
      out(row, col) = std::sqrt(std::sqrt(radicand));
    }
  }
  return TemperatureMap(std::move(out));
}

Grid<unsigned char> inpaint_region(const ComponentLayout& layout,
                                   std::span<const int> low_emissivity_materials) {
  const std::size_t H = layout.height();
  const std::size_t W = layout.width();
  Grid<unsigned char> unknown(H, W, 0);
  auto is_low = [&](std::size_t row, std::size_t col) {
    const int material = layout.material_at(row, col) + 1;
    return std::find(low_emissivity_materials.begin(), low_emissivity_materials.end(), material) !=
           low_emissivity_materials.end();
  };
  for (std::size_t row = 0; row < H; ++row) {
    for (std::size_t col = 0; col < W; ++col) {
      if (!is_low(row, col)) continue;
      unknown(row, col) = 1;
      if (row > 0) unknown(row - 1, col) = 1;
      if (row + 1 < H) unknown(row + 1, col) = 1;
      if (col > 0) unknown(row, col - 1) = 1;
      if (col + 1 < W) unknown(row, col + 1) = 1;
    }
  }
  return unknown;
}

namespace {

// One smoothness row: a linear stencil over grid cells whose value vanishes
// for every affine field.
struct Stencil {
  std::vector<std::pair<std::size_t, double>> terms;  // (flat cell index, weight)
};

std::vector<Stencil> smoothness_stencils(std::size_t H, std::size_t W) {
  std::vector<Stencil> rows;
  auto flat = [W](std::size_t r, std::size_t c) { return r * W + c; };
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      const bool top = r == 0, bottom = r + 1 == H, left = c == 0, right = c + 1 == W;
      if (!top && !bottom && !left && !right) {
        rows.push_back({{{flat(r, c), -4.0},
                         {flat(r - 1, c), 1.0},
                         {flat(r + 1, c), 1.0},
                         {flat(r, c - 1), 1.0},
                         {flat(r, c + 1), 1.0}}});
      } else if ((top || bottom) && !left && !right) {
        rows.push_back({{{flat(r, c), -2.0}, {flat(r, c - 1), 1.0}, {flat(r, c + 1), 1.0}}});
      } else if ((left || right) && !top && !bottom) {
        rows.push_back({{{flat(r, c), -2.0}, {flat(r - 1, c), 1.0}, {flat(r + 1, c), 1.0}}});
      } else {
        // Corner: the mixed difference of the 2x2 block vanishes for affine fields.
        const std::size_t r2 = top ? r + 1 : r - 1;
        const std::size_t c2 = left ? c + 1 : c - 1;
        rows.push_back({{{flat(r, c), 1.0},
                         {flat(r, c2), -1.0},
                         {flat(r2, c), -1.0},
                         {flat(r2, c2), 1.0}}});
      }
    }
  }
  return rows;
}

}  // namespace

TemperatureMap inpaint_low_emissivity(const TemperatureMap& map, const ComponentLayout& layout,
                                      std::span<const int> low_emissivity_materials) {
  if (map.height() != layout.height() || map.width() != layout.width()) {
    throw ValidationError("map and layout shapes differ");
  }
  const std::size_t H = map.height();
  const std::size_t W = map.width();
  const Grid<unsigned char> unknown = inpaint_region(layout, low_emissivity_materials);

  std::vector<std::ptrdiff_t> column(H * W, -1);
  std::ptrdiff_t n_unknown = 0;
  double known_min = std::numeric_limits<double>::infinity();
  double known_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < H * W; ++i) {
    if (unknown.values()[i]) {
      column[i] = n_unknown++;
    } else {
      known_min = std::min(known_min, map.grid().values()[i]);
      known_max = std::max(known_max, map.grid().values()[i]);
    }
  }
  if (n_unknown == 0) return map;
  if (n_unknown == static_cast<std::ptrdiff_t>(H * W)) {
    throw ValidationError("inpainting region covers the whole map; no known cells remain");
  }

  // Least squares over the smoothness rows that touch an unknown cell:
  // minimise |A x + b|^2, solved through the normal equations.
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rhs;
  std::size_t n_rows = 0;
  for (const auto& stencil : smoothness_stencils(H, W)) {
    bool touches = false;
    for (const auto& [cell, w] : stencil.terms) touches = touches || column[cell] >= 0;
    if (!touches) continue;
    double b = 0.0;
    for (const auto& [cell, w] : stencil.terms) {
      if (column[cell] >= 0) {
        triplets.emplace_back(static_cast<int>(n_rows), static_cast<int>(column[cell]), w);
      } else {
        b += w * map.grid().values()[cell];
      }
    }
    rhs.push_back(b);
    ++n_rows;
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(n_rows), n_unknown);
  A.setFromTriplets(triplets.begin(), triplets.end());
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));

  const Eigen::SparseMatrix<double> normal = (A.transpose() * A).pruned();
  const Eigen::VectorXd right = -(A.transpose() * b);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(normal);
  if (solver.info() != Eigen::Success) {
    throw ValidationError("inpainting system could not be factorised");
  }
  const auto& d = solver.vectorD();
  if (d.minCoeff() <= 1e-10 * d.maxCoeff()) {
    throw ValidationError("known cells do not determine the inpainting region");
  }
  const Eigen::VectorXd x = solver.solve(right);

  const double margin = 0.1 * (known_max - known_min);
  Grid<double> out = map.grid();
  for (std::size_t i = 0; i < H * W; ++i) {
    if (column[i] < 0) continue;
    const double v = x[column[i]];
    if (!std::isfinite(v)) throw ComputationError("inpainting produced a non-finite value");
    out.values()[i] = std::clamp(v, known_min - margin, known_max + margin);
  }
  return TemperatureMap(std::move(out));
}

}  // namespace thermopower
