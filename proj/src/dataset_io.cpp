#include "thermopower/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "thermopower/boards.hpp"
#include "thermopower/error.hpp"
#include "thermopower/io.hpp"

namespace thermopower {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

namespace {

json parse_json_file(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::map<ComponentId, double> id_map(const json& j, const std::string& what) {
  if (!j.is_object()) throw ParseError(what + " must be an object keyed by component id");
  std::map<ComponentId, double> out;
  for (const auto& [key, value] : j.items()) {
    ComponentId id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ParseError(what + ": '" + key + "' is not a component id");
    }
    out[id] = value.get<double>();
  }
  return out;
}

json id_map_json(const std::map<ComponentId, double>& m) {
  json j = json::object();
  for (const auto& [id, value] : m) j[std::to_string(id)] = value;
  return j;
}

std::string instance_stem(const MeasurementInstance& inst, std::size_t position) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "_%04zu_v%02d", position, inst.voltage_index);
  return inst.config + buf;
}

}  // namespace

json params_to_json(const ModelParams& params) {
  json c = json::array();
  for (int a = 0; a < params.mu; ++a) {
    json row = json::array();
    for (int b = 0; b < params.mu; ++b) row.push_back(params.c(a, b));
    c.push_back(row);
  }
  return {{"mu", params.mu},
          {"conductance", c},
          {"emissivity", params.emissivity},
          {"h", params.h},
          {"r", params.r},
          {"variant", std::string(to_string(params.variant))}};
}

ModelParams params_from_json(const json& j) {
  try {
    ModelParams p;
    p.mu = j.at("mu").get<int>();
    if (p.mu < 1) throw ValidationError("mu must be positive");
    const auto& c = j.at("conductance");
    if (!c.is_array() || c.size() != static_cast<std::size_t>(p.mu)) {
      throw ValidationError("conductance must be a " + std::to_string(p.mu) + " x " +
                            std::to_string(p.mu) + " matrix");
    }
    for (const auto& row : c) {
      if (!row.is_array() || row.size() != static_cast<std::size_t>(p.mu)) {
        throw ValidationError("conductance rows must have " + std::to_string(p.mu) + " entries");
      }
      for (const auto& v : row) p.conductance.push_back(v.get<double>());
    }
    p.emissivity = j.value("emissivity", std::vector<double>(static_cast<std::size_t>(p.mu), 1.0));
    p.h = j.value("h", 0.0);
    p.r = j.value("r", 0.0);
    if (j.contains("variant")) {
      const auto v = parse_variant(j.at("variant").get<std::string>());
      if (!v) throw ValidationError("unknown variant '" + j.at("variant").get<std::string>() + "'");
      p.variant = *v;
    }
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("parameter block: ") + e.what());
  }
}

ModelParams load_params(const fs::path& path) {
  const json doc = parse_json_file(path);
  try {
    return params_from_json(doc.contains("params") ? doc.at("params") : doc);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_params(const fs::path& path, const ModelParams& params) {
  write_text(path, params_to_json(params).dump(2) + "\n");
}

ScenarioFile load_scenario(const fs::path& path) {
  const json doc = parse_json_file(path);
  const fs::path base = path.parent_path();
  ScenarioFile s;
  try {
    s.params = doc.contains("params") ? params_from_json(doc.at("params")) : synthetic_board_params();
    s.sigma = doc.value("sigma", s.sigma);
    s.readings = doc.value("readings", s.readings);
    s.seed = doc.value("seed", s.seed);
    s.voltages = doc.value("voltages", std::vector<double>{});
    for (const auto& c : doc.at("configurations")) {
      ScenarioConfig cfg{c.at("label").get<std::string>(),
                         c.at("layout").get<std::string>(),
                         ComponentLayout(Grid<int>(3, 3, 0), {{0, "board", kBoardMaterial}}, 1),
                         300.15, {}, {}, 0.0};
      const fs::path lp = cfg.layout_path.is_absolute() ? cfg.layout_path : base / cfg.layout_path;
      cfg.layout = load_layout(lp);
      cfg.t_amb = c.value("t_amb", cfg.t_amb);
      cfg.series_resistance = c.value("series_resistance", 0.0);
      if (c.contains("resistances")) cfg.resistances = id_map(c.at("resistances"), cfg.label + ".resistances");
      if (c.contains("injections")) cfg.injections = id_map(c.at("injections"), cfg.label + ".injections");
      if (cfg.resistances.empty() == cfg.injections.empty()) {
        throw ValidationError("configuration " + cfg.label + " needs exactly one of resistances or injections");
      }
      s.configs.push_back(std::move(cfg));
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (s.readings < 1) throw ValidationError(path.string() + ": readings must be at least 1");
  if (!(s.sigma >= 0.0)) throw ValidationError(path.string() + ": sigma must be non-negative");
  for (const auto& cfg : s.configs) {
    if (!cfg.resistances.empty() && s.voltages.empty()) {
      throw ValidationError(path.string() + ": configuration " + cfg.label +
                            " uses resistances but no voltages are given");
    }
  }
  return s;
}

std::vector<MeasurementInstance> simulate_scenario(const ScenarioFile& scenario) {
  std::vector<ResistorConfiguration> resistor;
  for (const auto& cfg : scenario.configs) {
    if (cfg.resistances.empty()) continue;
    Scenario s{cfg.layout, scenario.params, cfg.t_amb, {}, scenario.sigma, scenario.readings, scenario.seed};
    resistor.push_back({cfg.label, std::move(s), cfg.resistances, cfg.series_resistance});
  }
  std::vector<MeasurementInstance> out = generate_dataset(resistor, scenario.voltages);
  for (const auto& cfg : scenario.configs) {
    if (cfg.injections.empty()) continue;
    const auto index = static_cast<std::uint64_t>(out.size());
    Scenario s{cfg.layout, scenario.params, cfg.t_amb, cfg.injections, scenario.sigma, scenario.readings,
               scenario.seed};
    s.validate();
    const SteadyState state = solve_steady_state(s);
    std::vector<TemperatureMap> maps;
    for (int k = 0; k < s.readings; ++k) {
      maps.push_back(synthesize_observation(state.temperature, s.layout, s.params.emissivity, s.t_amb,
                                            s.sigma,
                                            reading_seed(s.seed, index, static_cast<std::uint64_t>(k))));
    }
    std::map<ComponentId, double> truth;
    for (const ComponentId id : cfg.layout.active_ids()) {
      const auto it = cfg.injections.find(id);
      truth[id] = it == cfg.injections.end() ? 0.0 : it->second;
    }
    out.push_back({std::move(maps), cfg.layout, 0.0, std::move(truth), cfg.label, 0});
  }
  return out;
}

fs::path save_dataset(const fs::path& dir, const std::vector<MeasurementInstance>& dataset) {
  fs::create_directories(dir / "maps");
  fs::create_directories(dir / "layouts");
  std::map<std::string, std::string> layout_files;  // config label -> relative path
  std::map<std::string, const ComponentLayout*> layout_of;
  json instances = json::array();
  for (std::size_t n = 0; n < dataset.size(); ++n) {
    const auto& inst = dataset[n];
    auto known = layout_of.find(inst.config);
    if (known == layout_of.end()) {
      const std::string rel = "layouts/" + inst.config + ".json";
      save_layout(dir / rel, inst.layout);
      layout_files[inst.config] = rel;
      layout_of[inst.config] = &inst.layout;
    } else if (!(*known->second == inst.layout)) {
      throw ValidationError("configuration " + inst.config + " appears with two different layouts");
    }
    json maps = json::array();
    for (std::size_t k = 0; k < inst.maps.size(); ++k) {
      const std::string rel = "maps/" + instance_stem(inst, n) + "_r" + std::to_string(k) + ".csv";
      save_temperature_map(dir / rel, inst.maps[k]);
      maps.push_back(rel);
    }
    instances.push_back({{"config", inst.config},
                         {"voltage_index", inst.voltage_index},
                         {"voltage", inst.voltage},
                         {"layout", layout_files[inst.config]},
                         {"maps", maps},
                         {"truth", id_map_json(inst.truth)}});
  }
  const json doc{{"format", "thermopower-dataset/1"}, {"instances", instances}};
  const fs::path manifest = dir / "instances.json";
  write_text(manifest, doc.dump(2) + "\n");
  return manifest;
}

std::vector<MeasurementInstance> load_dataset(const fs::path& manifest) {
  const json doc = parse_json_file(manifest);
  const fs::path base = manifest.parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  std::map<std::string, ComponentLayout> layouts;
  std::vector<MeasurementInstance> out;
  try {
    for (const auto& j : doc.at("instances")) {
      const std::string lp = j.at("layout").get<std::string>();
      auto it = layouts.find(lp);
      if (it == layouts.end()) it = layouts.emplace(lp, load_layout(resolve(lp))).first;
      std::vector<TemperatureMap> maps;
      for (const auto& m : j.at("maps")) maps.push_back(load_temperature_map(resolve(m.get<std::string>())));
      MeasurementInstance inst{std::move(maps), it->second, j.value("voltage", 0.0),
                               id_map(j.at("truth"), "truth"), j.at("config").get<std::string>(),
                               j.value("voltage_index", 0)};
      inst.validate();
      out.push_back(std::move(inst));
    }
  } catch (const json::exception& e) {
    throw ParseError(manifest.string() + ": " + e.what());
  }
  return out;
}

fs::path write_preset_scenario(const fs::path& dir, double sigma, int readings, std::uint64_t seed,
                               bool leads) {
  SyntheticDatasetOptions options;
  options.leads = leads;
  const auto configs = resistor_configurations(options);
  json list = json::array();
  for (const auto& c : configs) {
    const std::string rel = "layouts/" + c.label + ".json";
    save_layout(dir / rel, c.scenario.layout);
    json entry{{"label", c.label},
               {"layout", rel},
               {"t_amb", c.scenario.t_amb},
               {"resistances", id_map_json(c.resistances)}};
    if (c.series_resistance != 0.0) entry["series_resistance"] = c.series_resistance;
    list.push_back(entry);
  }
  const json doc{{"seed", seed},
                 {"sigma", sigma},
                 {"readings", readings},
                 {"voltages", sweep_voltages()},
                 {"params", params_to_json(options.params)},
                 {"configurations", list}};
  const fs::path path = dir / "scenario.json";
  write_text(path, doc.dump(2) + "\n");
  return path;
}

}  // namespace thermopower
