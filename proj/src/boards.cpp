#include "thermopower/boards.hpp"

#include "thermopower/error.hpp"

namespace thermopower {

ComponentLayout resistor_board(int height, int width, const std::vector<ResistorPlacement>& resistors,
                               bool with_leads) {
  Grid<int> ids(static_cast<std::size_t>(height), static_cast<std::size_t>(width), kBoardId);
  const int wire_id = static_cast<int>(resistors.size()) + 1;
  auto put = [&](int row, int col, int id) {
    if (row < 1 || col < 1 || row >= height - 1 || col >= width - 1) {
      throw ValidationError("resistor placement leaves the board interior");
    }
    ids(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) = id;
  };
  for (std::size_t k = 0; k < resistors.size(); ++k) {
    const auto& p = resistors[k];
    for (int r = 0; r < p.rows; ++r) {
      for (int c = 0; c < p.cols; ++c) put(p.top + r, p.left + c, static_cast<int>(k) + 1);
    }
    if (!with_leads) continue;
    const int lead_col = p.left + p.cols / 2;
    for (int i = 1; i <= p.lead_length; ++i) {
      put(p.top - i, lead_col, wire_id);
      put(p.top + p.rows - 1 + i, lead_col, wire_id);
    }
  }
  std::vector<ComponentInfo> manifest{{kBoardId, "board", kBoardMaterial}};
  for (std::size_t k = 0; k < resistors.size(); ++k) {
    manifest.push_back({static_cast<int>(k) + 1, "R" + std::to_string(k + 1), 3});
  }
  if (with_leads && !resistors.empty()) manifest.push_back({wire_id, "wire", kWireMaterial});
  return ComponentLayout(std::move(ids), std::move(manifest), 3);
}

ModelParams synthetic_board_params() {
  ModelParams p = ModelParams::uniform(3, 0.0, 1.0, 4e-5, 2e-13, Variant::Full);
  p.set_c(0, 0, 2e-3);  // board-board
  p.set_c(1, 1, 2e-2);  // wire-wire
  p.set_c(2, 2, 1e-2);  // resistor-resistor
  p.set_c(0, 1, 3e-3);
  p.set_c(0, 2, 1e-4);  // resistor bodies sit loosely on the board
  p.set_c(1, 2, 8e-3);
  p.emissivity = {0.95, 0.2, 0.95};
  return p;
}

std::vector<double> sweep_voltages() {
  std::vector<double> v;
  for (int i = 1; i <= 10; ++i) v.push_back(0.25 * i);
  return v;
}

namespace {

std::vector<ResistorPlacement> row_of(int top, std::initializer_list<int> lefts) {
  std::vector<ResistorPlacement> out;
  for (const int left : lefts) out.push_back({top, left});
  return out;
}

ResistorConfiguration make(std::string label, const ComponentLayout& layout, std::vector<double> ohms,
                           double t_amb, const SyntheticDatasetOptions& options) {
  std::map<ComponentId, double> resistances;
  for (std::size_t k = 0; k < ohms.size(); ++k) resistances[static_cast<int>(k) + 1] = ohms[k];
  Scenario scenario{layout, options.params, t_amb, {}, options.sigma, options.readings, options.seed};
  return {std::move(label), std::move(scenario), std::move(resistances), 0.0};
}

}  // namespace

std::vector<ResistorConfiguration> resistor_configurations(const SyntheticDatasetOptions& options) {
  constexpr int H = 40, W = 56;
  auto two_rows = [](std::initializer_list<int> lefts) {
    auto top = row_of(8, lefts);
    const auto bottom = row_of(26, lefts);
    top.insert(top.end(), bottom.begin(), bottom.end());
    return top;
  };
  std::vector<ResistorConfiguration> out;
  out.push_back(make("A", resistor_board(H, W, row_of(17, {9, 21, 33, 45}), options.leads), {27, 27, 10, 10}, 300.15,
                     options));
  out.push_back(make("B", resistor_board(H, W, two_rows({9, 21, 33, 45}), options.leads),
                     {12, 15, 18, 22, 10, 10, 27, 27}, 300.35, options));
  out.push_back(make("C", resistor_board(H, W, two_rows({15, 37}), options.leads), {1000, 1000, 100, 100}, 299.95,
                     options));
  out.push_back(make("D", resistor_board(H, W, row_of(15, {6, 18, 30, 42}), options.leads), {150, 150, 220, 220},
                     300.25, options));
  return out;
}

ComponentLayout compact_board_24x32() {
  return resistor_board(24, 32, row_of(9, {4, 11, 18, 25}), false);
}

}  // namespace thermopower
