#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "thermopower/boards.hpp"
#include "thermopower/error.hpp"
#include "thermopower/powerflow.hpp"
#include "thermopower/preprocess.hpp"
#include "thermopower/simulator.hpp"

using namespace thermopower;

namespace {

ComponentLayout small_board(std::size_t h, std::size_t w) {
  // Two parts and a short lead, all inside the interior.
  Grid<int> ids(h, w, 0);
  for (std::size_t r = 3; r < 6; ++r)
    for (std::size_t c = 2; c < 4; ++c) ids(r, c) = 1;
  for (std::size_t r = 3; r < 5; ++r)
    for (std::size_t c = w - 5; c < w - 3; ++c) ids(r, c) = 2;
  ids(2, 3) = 3;
  ids(1, 3) = 3;
  return ComponentLayout(ids, {{0, "board", 1}, {1, "R1", 3}, {2, "R2", 3}, {3, "wire", 2}}, 3);
}

// Independent dense assembly of the linear (r = 0) balance with a Dirichlet ring.
Grid<double> dense_linear_solve(const Scenario& s) {
  const auto& L = s.layout;
  const std::size_t H = L.height(), W = L.width();
  std::vector<int> index(H * W, -1);
  int n = 0;
  for (std::size_t r = 1; r + 1 < H; ++r)
    for (std::size_t c = 1; c + 1 < W; ++c) index[r * W + c] = n++;
  std::map<ComponentId, int> count;
  for (std::size_t r = 1; r + 1 < H; ++r)
    for (std::size_t c = 1; c + 1 < W; ++c) count[L.id_at(r, c)]++;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::size_t r = 1; r + 1 < H; ++r) {
    for (std::size_t c = 1; c + 1 < W; ++c) {
      const int i = index[r * W + c];
      const int m0 = L.info(L.id_at(r, c)).material - 1;
      const auto inj = s.injections.find(L.id_at(r, c));
      if (inj != s.injections.end()) b[i] += inj->second / count[L.id_at(r, c)];
      const std::pair<std::size_t, std::size_t> nb[] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& [rr, cc] : nb) {
        const int m1 = L.info(L.id_at(rr, cc)).material - 1;
        const double g = s.params.conductance[static_cast<std::size_t>(m0 * s.params.mu + m1)];
        A(i, i) += g;
        const int j = index[rr * W + cc];
        if (j >= 0) {
          A(i, j) -= g;
        } else {
          b[i] += g * s.t_amb;
        }
      }
      A(i, i) += s.params.h;
      b[i] += s.params.h * s.t_amb;
    }
  }
  const Eigen::VectorXd x = A.fullPivLu().solve(b);
  Grid<double> T(H, W, s.t_amb);
  for (std::size_t r = 1; r + 1 < H; ++r)
    for (std::size_t c = 1; c + 1 < W; ++c) T(r, c) = x[index[r * W + c]];
  return T;
}

}  // namespace

TEST_CASE("linear solve matches a dense oracle") {
  for (const auto [h, w] : {std::pair<std::size_t, std::size_t>{10, 12}, {20, 20}, {14, 9}}) {
    Scenario s{small_board(h, w), synthetic_board_params(), 300.15, {{1, 0.3}, {2, 0.05}}, 0.0, 1, 0};
    s.params.r = 0.0;
    const auto state = solve_steady_state(s);
    const auto oracle = dense_linear_solve(s);
    double worst = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i)
      worst = std::max(worst, std::abs(state.temperature.grid().values()[i] - oracle.values()[i]));
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("radiating board converges to the residual tolerance") {
  Scenario s{small_board(16, 18), synthetic_board_params(), 299.0, {{1, 1.0}, {2, 0.4}}, 0.0, 1, 0};
  s.params.r = 5e-12;  // strongly non-linear
  const auto state = solve_steady_state(s);
  CHECK(state.max_residual < 1e-10);
  CHECK(state.iterations >= 2);
  const auto residual = balance_residual(s, state.temperature);
  for (const double v : residual.values()) CHECK(std::abs(v) < 1e-10);
  for (std::size_t c = 0; c < 18; ++c) CHECK(state.temperature(0, c) == 299.0);
}

TEST_CASE("estimator inverts the solver") {
  const auto layout = compact_board_24x32();
  ModelParams p = synthetic_board_params();
  p.emissivity = {1.0, 1.0, 1.0};
  p.variant = Variant::Int;
  const Scenario s{layout, p, 300.15, {{1, 0.05}, {2, 0.1}, {3, 0.3}, {4, 1.0}}, 0.0, 1, 0};
  const auto state = solve_steady_state(s);
  const auto power = estimate_pixel_powers(state.temperature, layout, p, s.t_amb);
  const auto injected = injection_field(layout, s.injections);
  for (std::size_t r = 1; r + 1 < 24; ++r)
    for (std::size_t c = 1; c + 1 < 32; ++c) CHECK(std::abs(power(r, c) - injected(r, c)) <= 1e-6);
}

TEST_CASE("FULL estimator inverts grey-body observations") {
  const auto layout = resistor_board(24, 28, {{8, 5}, {8, 16}});
  ModelParams p = synthetic_board_params();
  const Scenario s{layout, p, 300.15, {{1, 0.2}, {2, 0.05}}, 0.0, 1, 0};
  const auto state = solve_steady_state(s);
  const auto seen = synthesize_observation(state.temperature, layout, p.emissivity, s.t_amb, 0.0, 0);
  p.variant = Variant::Full;
  const auto power = estimate_pixel_powers(seen, layout, p, s.t_amb);
  const auto injected = injection_field(layout, s.injections);
  for (std::size_t r = 1; r + 1 < 24; ++r)
    for (std::size_t c = 1; c + 1 < 28; ++c) CHECK(std::abs(power(r, c) - injected(r, c)) <= 1e-6);
}

TEST_CASE("injections split evenly over interior cells") {
  const auto layout = testing_support::one_part_board(6, 6, 1, 2, 1, 2);
  const auto f = injection_field(layout, {{1, 0.4}});
  CHECK(f(1, 1) == doctest::Approx(0.1));
  CHECK(f(2, 2) == doctest::Approx(0.1));
  CHECK(f(3, 3) == 0.0);
  CHECK_THROWS_AS(injection_field(layout, {{1, 0.4}, {9, 0.1}}), ValidationError);
}

TEST_CASE("resistor powers") {
  CHECK(ohmic_power(2.5, 150.0) * 1e3 == doctest::Approx(41.7).epsilon(1e-3));
  CHECK(ohmic_power(2.5, 220.0) * 1e3 == doctest::Approx(28.4).epsilon(2e-3));
  CHECK(ohmic_power(1.0, 15.0) == doctest::Approx(1.0 / 15.0));
  CHECK(resistor_power(1.0, 15.0, 0.0) == ohmic_power(1.0, 15.0));
  CHECK(resistor_power(1.0, 15.0, 2.0) == doctest::Approx(15.0 / 289.0));
  CHECK_THROWS_AS(ohmic_power(1.0, 0.0), ValidationError);

  // Configuration D at 2.5 V.
  const auto configs = resistor_configurations();
  const auto& d = configs[3];
  CHECK(d.label == "D");
  std::vector<double> mw;
  for (const auto& [id, ohms] : d.resistances) mw.push_back(resistor_power(2.5, ohms, d.series_resistance) * 1e3);
  REQUIRE(mw.size() == 4);
  CHECK(mw[0] == doctest::Approx(41.7).epsilon(1e-3));
  CHECK(mw[1] == doctest::Approx(41.7).epsilon(1e-3));
  CHECK(mw[2] == doctest::Approx(28.4).epsilon(2e-3));
  CHECK(mw[3] == doctest::Approx(28.4).epsilon(2e-3));
}

TEST_CASE("observations are seeded and unbiased") {
  const auto layout = testing_support::uniform_board(60, 60);
  const auto truth = testing_support::constant_map(60, 60, 300.0);
  const double eps[] = {1.0, 1.0, 1.0};
  const auto a = synthesize_observation(truth, layout, eps, 300.0, 0.1, 42);
  const auto b = synthesize_observation(truth, layout, eps, 300.0, 0.1, 42);
  const auto c = synthesize_observation(truth, layout, eps, 300.0, 0.1, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  double mean = 0.0, sq = 0.0;
  for (const double v : a.grid().values()) mean += v - 300.0;
  mean /= 3600.0;
  for (const double v : a.grid().values()) sq += (v - 300.0 - mean) * (v - 300.0 - mean);
  const double sd = std::sqrt(sq / 3599.0);
  CHECK(std::abs(mean) < 0.01);
  CHECK(sd == doctest::Approx(0.1).epsilon(0.05));
  CHECK(synthesize_observation(truth, layout, eps, 300.0, 0.0, 1) == truth);
  CHECK(reading_seed(1, 0, 0) != reading_seed(1, 0, 1));
  CHECK(reading_seed(1, 0, 1) != reading_seed(1, 1, 0));
}

TEST_CASE("low-emissivity cells look colder than they are") {
  CHECK(apparent_temperature(320.0, 0.2, 300.0) < 320.0);
  CHECK(apparent_temperature(320.0, 0.2, 300.0) > 300.0);
  CHECK(apparent_temperature(320.0, 1.0, 300.0) == 320.0);
}

TEST_CASE("datasets are deterministic") {
  SyntheticDatasetOptions o;
  o.readings = 2;
  auto configs = resistor_configurations(o);
  configs.erase(configs.begin() + 1, configs.end());
  const std::vector<double> volts{0.5, 1.0};
  const auto a = generate_dataset(configs, volts);
  const auto b = generate_dataset(configs, volts);
  REQUIRE(a.size() == 2);
  CHECK(a[0].maps[0] == b[0].maps[0]);
  CHECK(a[1].maps[1] == b[1].maps[1]);
  CHECK_FALSE(a[0].maps[0] == a[0].maps[1]);
  CHECK(a[1].truth.at(1) == doctest::Approx(1.0 / 27.0));
  CHECK(a[1].voltage_index == 1);
}

TEST_CASE("scenario validation") {
  const auto layout = compact_board_24x32();
  Scenario s{layout, synthetic_board_params(), 300.0, {{1, -0.1}}, 0.0, 1, 0};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.injections = {{17, 0.1}};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.injections = {{1, 0.1}};
  s.readings = 0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}
