#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermopower/dataset_io.hpp"
#include "thermopower/error.hpp"
#include "thermopower/fit.hpp"
#include "thermopower/io.hpp"
#include "thermopower/metrics.hpp"
#include "thermopower/powerflow.hpp"
#include "thermopower/svg.hpp"

namespace thermopower::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string mw(double watts) { return format_double(watts * 1e3); }

Variant variant_or_throw(const std::string& text) {
  const auto v = parse_variant(text);
  if (!v) throw ValidationError("unknown variant '" + text + "' (expected full|int|norad|noflux)");
  return *v;
}

json summary_json(const std::optional<ErrorSummary>& s) {
  if (!s) return nullptr;
  return {{"e_std_W", s->e_std}, {"e_rel", s->e_rel}, {"samples", s->samples}};
}

json fit_json(const FitResult& fit) {
  return {{"params", params_to_json(fit.params)},
          {"objective", fit.objective},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"rank_deficient", fit.rank_deficient},
          {"stop_reason", fit.stop_reason},
          {"objective_trace", fit.objective_trace}};
}

std::string predictions_csv(const std::vector<PowerSample>& samples) {
  std::string s = "config,voltage_index,component_id,p_true_mW,p_est_mW\n";
  for (const auto& p : samples) {
    s += p.config + "," + std::to_string(p.voltage_index) + "," + std::to_string(p.component) + "," +
         mw(p.truth) + "," + mw(p.estimate) + "\n";
  }
  return s;
}

double parse_number(const std::string& field, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ParseError(where + ": cannot parse '" + field + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<PowerSample> load_predictions(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("config,voltage_index,component_id,p_true_mW,p_est_mW", 0) != 0) {
    throw ParseError(path.string() + ": expected header config,voltage_index,component_id,p_true_mW,p_est_mW");
  }
  std::vector<PowerSample> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    const std::string where = path.string() + ": row " + std::to_string(row);
    if (f.size() != 5) throw ParseError(where + ": expected 5 fields");
    out.push_back({f[0], static_cast<int>(parse_number(f[1], where)), static_cast<int>(parse_number(f[2], where)),
                   parse_number(f[4], where) * 1e-3, parse_number(f[3], where) * 1e-3});
  }
  return out;
}

// "a:b:step" in milliwatts, inclusive of b (up to rounding).
std::vector<double> parse_grid(const std::string& spec) {
  const auto f = split(spec, ':');
  if (f.size() != 3) throw ValidationError("--pmin-grid expects a:b:step, got '" + spec + "'");
  const double a = parse_number(f[0], "--pmin-grid"), b = parse_number(f[1], "--pmin-grid"),
               step = parse_number(f[2], "--pmin-grid");
  if (!(step > 0.0) || b < a) throw ValidationError("--pmin-grid needs step > 0 and a <= b");
  const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
  std::vector<double> grid;
  for (long i = 0; i <= n; ++i) grid.push_back(a + static_cast<double>(i) * step);
  return grid;
}

void announce(std::ostream& out, const fs::path& path) { out << "wrote " << path.string() << "\n"; }

int cmd_preset(const fs::path& dir, double sigma, std::uint64_t seed, int readings, bool no_leads,
               std::ostream& out) {
  const fs::path path = write_preset_scenario(dir, sigma, readings, seed, !no_leads);
  announce(out, path);
  return 0;
}

int cmd_simulate(const fs::path& scenario_path, const fs::path& dir, std::optional<double> sigma,
                 std::optional<std::uint64_t> seed, std::ostream& out) {
  ScenarioFile scenario = load_scenario(scenario_path);
  if (sigma) scenario.sigma = *sigma;
  if (seed) scenario.seed = *seed;
  if (!(scenario.sigma >= 0.0)) throw ValidationError("--sigma must be non-negative");
  const auto dataset = simulate_scenario(scenario);
  save_dataset(dir, dataset);
  std::size_t maps = 0, samples = 0, readings = 0;
  for (const auto& inst : dataset) {
    maps += inst.maps.size();
    samples += inst.truth.size();
    readings += inst.truth.size() * inst.maps.size();
  }
  out << dataset.size() << " instances, " << maps << " maps written (" << samples << " component samples, "
      << readings << " component readings)\n";
  return 0;
}

struct EstimateOptions {
  std::string map, layout, dataset, params, variant = "int", config, out;
  double voltage = 0.0;
  std::optional<double> t_amb;
  bool emit_powermap = false, emit_svg = false;
};

int cmd_estimate(const EstimateOptions& o, std::ostream& out) {
  const Variant variant = variant_or_throw(o.variant);
  ModelParams params = load_params(o.params);
  params.variant = variant;
  const fs::path dir = o.out;

  struct Job {
    TemperatureMap map;
    ComponentLayout layout;
    std::string config;
    int voltage_index;
    double voltage;
    std::map<ComponentId, double> truth;
  };
  std::vector<Job> jobs;
  if (!o.dataset.empty()) {
    for (auto& inst : load_dataset(o.dataset)) {
      jobs.push_back({inst.mean_map(), inst.layout, inst.config, inst.voltage_index, inst.voltage, inst.truth});
    }
  } else {
    if (o.map.empty() || o.layout.empty()) throw ValidationError("estimate needs --map and --layout, or --dataset");
    TemperatureMap map = load_temperature_map(o.map);
    ComponentLayout layout = load_layout(o.layout);
    if (map.height() != layout.height() || map.width() != layout.width()) {
      throw ValidationError("map " + o.map + " and layout " + o.layout + " differ in shape");
    }
    const std::string config = o.config.empty() ? fs::path(o.map).stem().string() : o.config;
    jobs.push_back({std::move(map), std::move(layout), config, 0, o.voltage, {}});
  }
  if (params.mu != jobs.front().layout.mu()) {
    throw ValidationError("parameter block has mu=" + std::to_string(params.mu) + " but the layout has mu=" +
                          std::to_string(jobs.front().layout.mu()));
  }

  std::string csv = "config,voltage_V,component_id,p_true_mW,p_est_mW\n";
  for (std::size_t n = 0; n < jobs.size(); ++n) {
    const auto& job = jobs[n];
    const PreparedMap prepared = prepare_map(job.map, job.layout, variant, o.t_amb);
    const PowerMap power = estimate_pixel_powers(prepared.map, job.layout, params, prepared.t_amb);
    const auto report = component_report(power, job.layout, job.config, job.voltage);
    for (const auto& [id, est] : report.estimates) {
      const auto t = job.truth.find(id);
      csv += job.config + "," + format_double(job.voltage) + "," + std::to_string(id) + "," +
             (t == job.truth.end() ? std::string() : mw(t->second)) + "," + mw(est) + "\n";
    }
    const std::string stem =
        jobs.size() == 1 ? std::string("powermap") : job.config + "_v" + std::to_string(job.voltage_index);
    if (o.emit_powermap) save_power_map(dir / (stem + ".csv"), power);
    if (o.emit_svg) {
      write_text(dir / (stem + ".svg"),
                 power_map_svg(power, job.config + " " + format_double(job.voltage) + " V"));
    }
  }
  const fs::path path = dir / "estimates.csv";
  write_text(path, csv);
  out << jobs.size() << " maps estimated (" << to_string(variant) << ")\n";
  announce(out, path);
  return 0;
}

struct FitOptions {
  std::string manifest, variant = "int", out, initial;
  int folds = 10;
  std::uint64_t seed = 0;
  int max_iterations = 500;
  int restarts = 0;
  double weight = 1.0;
};

FitProblem make_problem(const FitOptions& o) {
  FitProblem p;
  p.variant = variant_or_throw(o.variant);
  p.dataset = load_dataset(o.manifest);
  if (p.dataset.empty()) throw ValidationError(o.manifest + ": no instances");
  p.initial = o.initial.empty() ? default_initial_params(p.variant, p.dataset.front().layout.mu())
                                : load_params(o.initial);
  p.initial.variant = p.variant;
  p.folds = o.folds;
  p.seed = o.seed;
  p.max_iterations = o.max_iterations;
  p.restarts = o.restarts;
  p.regularizer_weight = o.weight;
  p.validate();
  return p;
}

int cmd_fit(const FitOptions& o, std::ostream& out) {
  const FitProblem problem = make_problem(o);
  const FitResult fit = fit_parameters(problem);
  const auto prepared = prepare_dataset(canonical_order(problem.dataset), problem.variant);
  const auto predictions = predict(fit.params, prepared);
  json report = fit_json(fit);
  report["variant"] = std::string(to_string(problem.variant));
  report["instances"] = problem.dataset.size();
  report["seed"] = problem.seed;
  report["training"] = summary_json(summarize(predictions));
  const fs::path dir = o.out;
  write_text(dir / "fit.json", report.dump(2) + "\n");
  write_text(dir / "predictions.csv", predictions_csv(predictions));
  out << "objective " << format_double(fit.objective) << " W^2 after " << fit.iterations << " iterations ("
      << (fit.converged ? "converged" : "not converged") << ", " << fit.stop_reason << ")\n";
  if (fit.rank_deficient) out << "warning: rank-deficient Jacobian\n";
  announce(out, dir / "fit.json");
  announce(out, dir / "predictions.csv");
  return 0;
}

int cmd_crossval(const FitOptions& o, std::ostream& out) {
  const FitProblem problem = make_problem(o);
  const CrossValidation cv = cross_validate(problem);
  json folds = json::array();
  std::string csv = "fold,split,train,validate,e_std_mW,e_rel_percent,objective_W2,iterations,converged\n";
  for (std::size_t f = 0; f < cv.folds.size(); ++f) {
    const auto& fold = cv.folds[f];
    json j = fit_json(fold.fit);
    j["fold"] = f;
    j["train"] = fold.train_count;
    j["validate"] = fold.validate_count;
    j["validation"] = summary_json(fold.validation);
    folds.push_back(j);
    const std::string split_text =
        "train=" + std::to_string(fold.train_count) + " validate=" + std::to_string(fold.validate_count);
    csv += std::to_string(f) + "," + split_text + "," + std::to_string(fold.train_count) + "," +
           std::to_string(fold.validate_count) + "," +
           (fold.validation ? mw(fold.validation->e_std) : "") + "," +
           (fold.validation ? format_double(fold.validation->e_rel * 100) : "") + "," +
           format_double(fold.fit.objective) + "," + std::to_string(fold.fit.iterations) + "," +
           (fold.fit.converged ? "true" : "false") + "\n";
    out << "fold " << f << ": " << split_text;
    if (fold.validation) {
      out << " e_std=" << mw(fold.validation->e_std) << " mW e_rel=" << format_double(fold.validation->e_rel * 100)
          << " %";
    }
    out << "\n";
  }
  const json report{{"variant", std::string(to_string(problem.variant))},
                    {"folds", folds},
                    {"pooled", summary_json(cv.pooled)},
                    {"seed", problem.seed},
                    {"instances", problem.dataset.size()}};
  const fs::path dir = o.out;
  write_text(dir / "crossval.json", report.dump(2) + "\n");
  write_text(dir / "folds.csv", csv);
  write_text(dir / "predictions.csv", predictions_csv(cv.predictions));
  if (cv.pooled) {
    out << "pooled: e_std=" << mw(cv.pooled->e_std) << " mW e_rel=" << format_double(cv.pooled->e_rel * 100)
        << " %\n";
  }
  announce(out, dir / "crossval.json");
  announce(out, dir / "folds.csv");
  announce(out, dir / "predictions.csv");
  return 0;
}

int cmd_sweep(const std::string& predictions, const std::string& grid_spec, const fs::path& dir,
              std::ostream& out) {
  const auto samples = load_predictions(predictions);
  const auto grid_mw = parse_grid(grid_spec);
  std::vector<double> grid;
  for (const double g : grid_mw) grid.push_back(g * 1e-3);
  const auto sweep = min_power_sweep(samples, grid);
  std::string csv = "p_min_mW,e_rel_percent,e_std_mW,samples,status\n";
  std::size_t empty = 0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& p = sweep[i];
    csv += format_double(grid_mw[i]) + ",";
    if (p.summary) {
      csv += format_double(p.summary->e_rel * 100) + "," + mw(p.summary->e_std) + "," +
             std::to_string(p.summary->samples) + ",ok\n";
    } else {
      csv += ",,0,empty\n";
      ++empty;
    }
  }
  write_text(dir / "sweep.csv", csv);
  write_text(dir / "sweep.svg", sweep_svg(sweep));
  out << sweep.size() << " thresholds";
  if (empty > 0) out << " (" << empty << " without samples)";
  out << "\n";
  announce(out, dir / "sweep.csv");
  announce(out, dir / "sweep.svg");
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Per-component power estimation from thermal maps"};
  app.require_subcommand(1);
  std::string out_dir = ".";

  auto* preset = app.add_subcommand("preset", "Write the four-configuration resistor scenario and its layouts");
  double preset_sigma = 0.1;
  std::uint64_t preset_seed = 1;
  int preset_readings = 5;
  bool preset_no_leads = false;
  preset->add_option("--out", out_dir, "Output directory")->required();
  preset->add_option("--sigma", preset_sigma, "Sensor noise in kelvin");
  preset->add_option("--seed", preset_seed, "Random seed");
  preset->add_option("--readings", preset_readings, "Readings per instance")->check(CLI::PositiveNumber);
  preset->add_flag("--no-leads", preset_no_leads, "Leave out the wire leads");

  auto* simulate = app.add_subcommand("simulate", "Forward-simulate a scenario file into a dataset");
  std::string scenario;
  std::optional<double> sim_sigma;
  std::optional<std::uint64_t> sim_seed;
  simulate->add_option("scenario", scenario, "Scenario JSON")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--sigma", sim_sigma, "Override the scenario noise (kelvin)");
  simulate->add_option("--seed", sim_seed, "Override the scenario seed");

  auto* estimate = app.add_subcommand("estimate", "Estimate component powers from temperature maps");
  EstimateOptions eo;
  estimate->add_option("--map", eo.map, "Temperature map CSV");
  estimate->add_option("--layout", eo.layout, "Layout JSON");
  estimate->add_option("--dataset", eo.dataset, "Dataset manifest (instead of --map/--layout)");
  estimate->add_option("--params", eo.params, "Parameter JSON or fit report")->required();
  estimate->add_option("--variant", eo.variant, "full|int|norad|noflux");
  estimate->add_option("--config", eo.config, "Configuration label for the report");
  estimate->add_option("--voltage", eo.voltage, "Supply voltage for the report");
  estimate->add_option("--t-amb", eo.t_amb, "Known ambient temperature in kelvin (skips the histogram estimate)");
  estimate->add_option("--out", out_dir, "Output directory")->required();
  estimate->add_flag("--emit-powermap", eo.emit_powermap, "Write the pixel power map");
  estimate->add_flag("--emit-svg", eo.emit_svg, "Write an SVG heatmap of the power map");

  FitOptions fo;
  auto add_fit_options = [&](CLI::App* cmd) {
    cmd->add_option("dataset", fo.manifest, "Dataset manifest (instances.json)")->required();
    cmd->add_option("--variant", fo.variant, "full|int|norad|noflux");
    cmd->add_option("--seed", fo.seed, "Seed for fold assignment and restarts");
    cmd->add_option("--initial", fo.initial, "Initial parameter JSON");
    cmd->add_option("--max-iterations", fo.max_iterations, "Optimizer iteration budget")->check(CLI::PositiveNumber);
    cmd->add_option("--restarts", fo.restarts, "Extra seeded starting points")->check(CLI::NonNegativeNumber);
    cmd->add_option("--weight", fo.weight, "Board/wire regularizer weight")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", out_dir, "Output directory")->required();
  };
  auto* fit = app.add_subcommand("fit", "Train model parameters on a dataset");
  add_fit_options(fit);
  auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation on a dataset");
  add_fit_options(crossval);
  crossval->add_option("--folds", fo.folds, "Number of folds");

  auto* sweep = app.add_subcommand("sweep", "Error metrics against a minimum-power threshold");
  std::string predictions, grid = "0:500:50";
  sweep->add_option("predictions", predictions, "Predictions CSV")->required();
  sweep->add_option("--pmin-grid", grid, "Thresholds a:b:step in mW");
  sweep->add_option("--out", out_dir, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*preset) return cmd_preset(out_dir, preset_sigma, preset_seed, preset_readings, preset_no_leads, out);
    if (*simulate) return cmd_simulate(scenario, out_dir, sim_sigma, sim_seed, out);
    if (*estimate) {
      eo.out = out_dir;
      return cmd_estimate(eo, out);
    }
    if (*fit || *crossval) {
      fo.out = out_dir;
      return *fit ? cmd_fit(fo, out) : cmd_crossval(fo, out);
    }
    if (*sweep) return cmd_sweep(predictions, grid, out_dir, out);
  } catch (const ComputationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace thermopower::cli
