#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermopower/simulator.hpp"
#include "thermopower/types.hpp"

namespace thermopower {

/// A rectangular resistor body with vertical leads above and below.
struct ResistorPlacement {
  int top = 0, left = 0;      // body corner (zero-based row, column)
  int rows = 6, cols = 3;     // body size
  int lead_length = 4;        // wire cells above and below the body
};

/// Builds a mu = 3 layout: board id 0, resistors 1..n in placement order,
/// and a single wire component n + 1 holding every lead cell.
ComponentLayout resistor_board(int height, int width, const std::vector<ResistorPlacement>& resistors,
                               bool with_leads = true);

/// Generating parameters of the synthetic carrier board (board, wire,
/// resistor). These are simulation settings, not measured values.
ModelParams synthetic_board_params();

/// Supply voltages 0.25 V .. 2.50 V in 0.25 V steps.
std::vector<double> sweep_voltages();

struct SyntheticDatasetOptions {
  double sigma = 0.1;
  int readings = 5;
  std::uint64_t seed = 1;
  ModelParams params = synthetic_board_params();
  bool leads = true;  // wire leads above and below every resistor
};

/// The four resistor configurations A-D with their nominal resistances, each
/// placed on its own 40 x 56 board layout.
std::vector<ResistorConfiguration> resistor_configurations(const SyntheticDatasetOptions& options = {});

/// Small 24 x 32 board with four resistors and no leads.
ComponentLayout compact_board_24x32();

}  // namespace thermopower
