#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "thermopower/types.hpp"

namespace testing_support {

using namespace thermopower;

// Board of the given size with one mu=3 part (id 1) covering rows r0..r1, cols c0..c1.
inline ComponentLayout one_part_board(std::size_t h, std::size_t w, std::size_t r0, std::size_t r1,
                                      std::size_t c0, std::size_t c1) {
  Grid<int> ids(h, w, 0);
  for (std::size_t r = r0; r <= r1; ++r)
    for (std::size_t c = c0; c <= c1; ++c) ids(r, c) = 1;
  return ComponentLayout(ids, {{0, "board", kBoardMaterial}, {1, "R1", 3}}, 3);
}

inline ComponentLayout uniform_board(std::size_t h, std::size_t w, int mu = 3) {
  return ComponentLayout(Grid<int>(h, w, 0), {{0, "board", kBoardMaterial}}, mu);
}

inline TemperatureMap constant_map(std::size_t h, std::size_t w, double t) {
  return TemperatureMap(Grid<double>(h, w, t));
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("thermopower_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
