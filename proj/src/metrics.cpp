#include "thermopower/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "thermopower/error.hpp"

namespace thermopower {

double aggregate(const PowerMap& power, const ComponentLayout& layout, ComponentId id) {
  if (!layout.contains(id)) throw ValidationError("unknown component id " + std::to_string(id));
  if (!power.same_shape(layout.height(), layout.width())) {
    throw ValidationError("power map and layout shapes differ");
  }
  double sum = 0.0;
  for (std::size_t row = 1; row + 1 < power.height(); ++row) {
    for (std::size_t col = 1; col + 1 < power.width(); ++col) {
      if (layout.id_at(row, col) == id) sum += power(row, col);
    }
  }
  return sum;
}

ComponentPowerReport component_report(const PowerMap& power, const ComponentLayout& layout,
                                      std::string config, double voltage) {
  ComponentPowerReport report;
  report.config = std::move(config);
  report.voltage = voltage;
  for (const auto& c : layout.manifest()) report.estimates[c.id] = aggregate(power, layout, c.id);
  report.board = report.estimates.at(kBoardId);
  for (const ComponentId id : layout.wire_ids()) report.wire += report.estimates.at(id);
  return report;
}

namespace {

// Samples grouped by configuration (label order), each group ordered by
// voltage index then component so that the sums are order independent.
std::map<std::string, std::vector<PowerSample>> group_filtered(std::span<const PowerSample> samples,
                                                               double p_min) {
  std::map<std::string, std::vector<PowerSample>> groups;
  for (const auto& s : samples) {
    if (s.truth >= p_min) groups[s.config].push_back(s);
  }
  for (auto& [label, group] : groups) {
    std::sort(group.begin(), group.end(), [](const PowerSample& a, const PowerSample& b) {
      return std::tie(a.voltage_index, a.component, a.truth, a.estimate) <
             std::tie(b.voltage_index, b.component, b.truth, b.estimate);
    });
  }
  return groups;
}

template <typename Term>
std::optional<double> nested_mean(std::span<const PowerSample> samples, double p_min, Term term) {
  const auto groups = group_filtered(samples, p_min);
  if (groups.empty()) return std::nullopt;
  double outer = 0.0;
  for (const auto& [label, group] : groups) {
    double inner = 0.0;
    for (const auto& s : group) inner += term(s);
    outer += inner / static_cast<double>(group.size());
  }
  return outer / static_cast<double>(groups.size());
}

}  // namespace

std::optional<double> error_std(std::span<const PowerSample> samples, double p_min) {
  const auto msq = nested_mean(samples, p_min, [](const PowerSample& s) {
    const double d = s.estimate - s.truth;
    return d * d;
  });
  if (!msq) return std::nullopt;
  return std::sqrt(*msq);
}

std::optional<double> error_rel(std::span<const PowerSample> samples, double p_min) {
  return nested_mean(samples, p_min, [](const PowerSample& s) {
    if (!(s.truth > 0.0)) {
      throw ValidationError("relative error needs positive true power (config " + s.config +
                            ", component " + std::to_string(s.component) + ")");
    }
    return std::abs((s.estimate - s.truth) / s.truth);
  });
}

std::optional<ErrorSummary> summarize(std::span<const PowerSample> samples, double p_min) {
  const auto e_std = error_std(samples, p_min);
  if (!e_std) return std::nullopt;
  ErrorSummary out;
  out.e_std = *e_std;
  out.e_rel = *error_rel(samples, p_min);
  out.p_min = p_min;
  out.samples = static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [&](const PowerSample& s) { return s.truth >= p_min; }));
  return out;
}

std::vector<SweepPoint> min_power_sweep(std::span<const PowerSample> samples,
                                        std::span<const double> p_min_grid) {
  if (!std::is_sorted(p_min_grid.begin(), p_min_grid.end())) {
    throw ValidationError("P_min grid must be sorted ascending");
  }
  std::vector<SweepPoint> out;
  out.reserve(p_min_grid.size());
  for (const double p_min : p_min_grid) out.push_back({p_min, summarize(samples, p_min)});
  return out;
}

SpreadSummary spread(std::span<const ReadingEstimates> instances) {
  SpreadSummary out;
  for (const auto& readings : instances) {
    if (readings.size() < 2) throw ValidationError("spread needs at least two readings per instance");
    const std::size_t k = readings.front().size();
    if (k == 0) throw ValidationError("spread needs at least one component per reading");
    double var_sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double mean = 0.0;
      for (const auto& r : readings) {
        if (r.size() != k) throw ValidationError("readings disagree on component count");
        mean += r[c];
      }
      mean /= static_cast<double>(readings.size());
      double ss = 0.0;
      for (const auto& r : readings) ss += (r[c] - mean) * (r[c] - mean);
      var_sum += ss / static_cast<double>(readings.size() - 1);
    }
    out.per_instance.push_back(std::sqrt(var_sum / static_cast<double>(k)));
  }
  if (!out.per_instance.empty()) {
    double sum = 0.0;
    for (const double s : out.per_instance) sum += s;
    out.mean = sum / static_cast<double>(out.per_instance.size());
    out.max = *std::max_element(out.per_instance.begin(), out.per_instance.end());
  }
  return out;
}

}  // namespace thermopower
