#include "thermopower/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "thermopower/error.hpp"

namespace thermopower {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view token, const std::filesystem::path& path, std::size_t row) {
  T value{};
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    throw ParseError(path.string() + ": row " + std::to_string(row) + ": cannot parse '" +
                     std::string(token) + "'");
  }
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

struct Header {
  std::string unit;
  std::size_t height = 0;
  std::size_t width = 0;
};

Header parse_header(std::string_view line, const std::filesystem::path& path) {
  line = trim(line);
  if (line.empty() || line.front() != '#') {
    throw ParseError(path.string() + ": missing '# unit=... height=... width=...' header");
  }
  line.remove_prefix(1);
  Header h;
  std::istringstream words{std::string(line)};
  std::string word;
  while (words >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = word.substr(0, eq);
    const std::string_view value = std::string_view(word).substr(eq + 1);
    if (key == "unit") {
      h.unit = std::string(value);
    } else if (key == "height") {
      h.height = parse_number<std::size_t>(value, path, 0);
    } else if (key == "width") {
      h.width = parse_number<std::size_t>(value, path, 0);
    }
  }
  return h;
}

template <typename T>
Grid<T> read_rows(std::istream& in, std::size_t height, std::size_t width,
                  const std::filesystem::path& path) {
  std::vector<T> values;
  values.reserve(height * width);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (row == height) throw ParseError(path.string() + ": more than " + std::to_string(height) + " rows");
    const auto tokens = split_commas(view);
    if (tokens.size() != width) {
      throw ParseError(path.string() + ": row " + std::to_string(row + 1) + " has " +
                       std::to_string(tokens.size()) + " values, expected " + std::to_string(width));
    }
    for (const auto tok : tokens) values.push_back(parse_number<T>(tok, path, row + 1));
    ++row;
  }
  if (row != height) {
    throw ParseError(path.string() + ": expected " + std::to_string(height) + " rows, found " +
                     std::to_string(row));
  }
  return Grid<T>(height, width, std::move(values));
}

std::string unit_token(GridUnit unit) {
  switch (unit) {
    case GridUnit::Kelvin: return "K";
    case GridUnit::Celsius: return "C";
    case GridUnit::Watt: return "W";
  }
  return "K";
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

GridFile read_grid_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string first;
  if (!std::getline(in, first)) throw ParseError(path.string() + ": empty file");
  const Header h = parse_header(first, path);
  GridFile file;
  if (h.unit == "K") {
    file.unit = GridUnit::Kelvin;
  } else if (h.unit == "C") {
    file.unit = GridUnit::Celsius;
  } else if (h.unit == "W") {
    file.unit = GridUnit::Watt;
  } else {
    throw ParseError(path.string() + ": unknown unit '" + h.unit + "'");
  }
  if (h.height == 0 || h.width == 0) throw ParseError(path.string() + ": header lacks height/width");
  file.values = read_rows<double>(in, h.height, h.width, path);
  return file;
}

void write_grid_file(const std::filesystem::path& path, const GridFile& file) {
  auto out = open_output(path);
  const auto& g = file.values;
  out << "# unit=" << unit_token(file.unit) << " height=" << g.height() << " width=" << g.width()
      << '\n';
  for (std::size_t row = 0; row < g.height(); ++row) {
    for (std::size_t col = 0; col < g.width(); ++col) {
      if (col) out << ',';
      out << format_double(g(row, col));
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

TemperatureMap load_temperature_map(const std::filesystem::path& path) {
  GridFile file = read_grid_file(path);
  if (file.unit == GridUnit::Watt) throw ParseError(path.string() + ": unit=W is not a temperature");
  if (file.unit == GridUnit::Celsius) {
    for (double& v : file.values.values()) v += 273.15;
  }
  return TemperatureMap(std::move(file.values));
}

void save_temperature_map(const std::filesystem::path& path, const TemperatureMap& map) {
  write_grid_file(path, GridFile{GridUnit::Kelvin, map.grid()});
}

void save_power_map(const std::filesystem::path& path, const PowerMap& map) {
  write_grid_file(path, GridFile{GridUnit::Watt, map});
}

PowerMap load_power_map(const std::filesystem::path& path) {
  GridFile file = read_grid_file(path);
  if (file.unit != GridUnit::Watt) throw ParseError(path.string() + ": expected unit=W");
  return std::move(file.values);
}

ComponentLayout load_layout(const std::filesystem::path& path) {
  auto in = open_input(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    const int mu = doc.at("mu").get<int>();
    std::vector<ComponentInfo> manifest;
    for (const auto& c : doc.at("components")) {
      manifest.push_back({c.at("id").get<int>(), c.at("name").get<std::string>(),
                          c.at("material").get<int>()});
    }
    std::filesystem::path grid_path = doc.at("grid").get<std::string>();
    if (grid_path.is_relative()) grid_path = path.parent_path() / grid_path;

    auto grid_in = open_input(grid_path);
    // Optional `# height=H width=W` header; otherwise the shape is inferred.
    std::vector<std::vector<int>> rows;
    std::string line;
    std::size_t row = 0;
    while (std::getline(grid_in, line)) {
      const auto view = trim(line);
      if (view.empty() || view.front() == '#') continue;
      std::vector<int> values;
      for (const auto tok : split_commas(view)) values.push_back(parse_number<int>(tok, grid_path, row));
      if (!rows.empty() && values.size() != rows.front().size()) {
        throw ParseError(grid_path.string() + ": row " + std::to_string(row + 1) + " has " +
                         std::to_string(values.size()) + " ids, expected " +
                         std::to_string(rows.front().size()));
      }
      rows.push_back(std::move(values));
      ++row;
    }
    if (rows.empty()) throw ParseError(grid_path.string() + ": empty id grid");
    Grid<int> ids(rows.size(), rows.front().size(), 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < rows[r].size(); ++c) ids(r, c) = rows[r][c];
    }
    return ComponentLayout(std::move(ids), std::move(manifest), mu);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_layout(const std::filesystem::path& path, const ComponentLayout& layout) {
  const std::string grid_name = path.stem().string() + "_grid.csv";
  json doc;
  doc["mu"] = layout.mu();
  doc["components"] = json::array();
  for (const auto& c : layout.manifest()) {
    doc["components"].push_back({{"id", c.id}, {"name", c.name}, {"material", c.material}});
  }
  doc["grid"] = grid_name;
  {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
  }
  auto out = open_output(path.parent_path() / grid_name);
  const auto& ids = layout.ids();
  out << "# height=" << ids.height() << " width=" << ids.width() << '\n';
  for (std::size_t row = 0; row < ids.height(); ++row) {
    for (std::size_t col = 0; col < ids.width(); ++col) {
      if (col) out << ',';
      out << ids(row, col);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace thermopower
