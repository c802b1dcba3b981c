#include "thermopower/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace thermopower {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Blue (negative) - white - red (positive).
std::string diverging(double t) {
  t = std::clamp(t, -1.0, 1.0);
  int r = 255, g = 255, b = 255;
  if (t >= 0) {
    g = b = static_cast<int>(std::lround(255 * (1 - t)));
  } else {
    r = g = static_cast<int>(std::lround(255 * (1 + t)));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string power_map_svg(const PowerMap& power, const std::string& title) {
  constexpr double cell = 8.0, top = 28.0;
  const double w = cell * static_cast<double>(power.width());
  const double h = cell * static_cast<double>(power.height());
  double scale = 0.0;
  for (const double v : power.values()) {
    if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
  }
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h + top + 20)
    << "\">\n";
  s << "<text x=\"2\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" << escape(title)
    << (title.empty() ? "" : " ") << "(|P| max " << label(scale * 1e3) << " mW)</text>\n";
  for (std::size_t i = 0; i < power.height(); ++i) {
    for (std::size_t j = 0; j < power.width(); ++j) {
      const double v = power(i, j);
      const std::string fill = std::isfinite(v) ? diverging(scale > 0 ? v / scale : 0.0) : "#b0b0b0";
      s << "<rect x=\"" << num(cell * static_cast<double>(j)) << "\" y=\""
        << num(top + cell * static_cast<double>(i)) << "\" width=\"" << num(cell) << "\" height=\""
        << num(cell) << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

std::string sweep_svg(const std::vector<SweepPoint>& sweep) {
  constexpr double W = 640, H = 400, left = 70, right = 70, top = 30, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  double x_max = 0, rel_max = 0, std_max = 0;
  for (const auto& p : sweep) {
    x_max = std::max(x_max, p.p_min * 1e3);
    if (p.summary) {
      rel_max = std::max(rel_max, p.summary->e_rel * 100);
      std_max = std::max(std_max, p.summary->e_std * 1e3);
    }
  }
  if (x_max <= 0) x_max = 1;
  if (rel_max <= 0) rel_max = 1;
  if (std_max <= 0) std_max = 1;
  auto px = [&](double x) { return left + pw * x / x_max; };
  auto py = [&](double y, double ymax) { return top + ph * (1 - y / ymax); };

  // One polyline per run of consecutive defined points.
  auto lines = [&](auto value, double ymax, const char* colour) {
    std::ostringstream s;
    std::string pts;
    auto flush = [&] {
      if (!pts.empty()) {
        s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"" << pts
          << "\"/>\n";
      }
      pts.clear();
    };
    for (const auto& p : sweep) {
      if (!p.summary) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += num(px(p.p_min * 1e3)) + "," + num(py(value(*p.summary), ymax));
    }
    flush();
    return s.str();
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H)
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\""
    << num(ph) << "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double f = t / 5.0;
    const double y = top + ph * (1 - f);
    const double x = left + pw * f;
    s << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
      << label(rel_max * f) << "</text>\n";
    s << "<text x=\"" << num(left + pw + 6) << "\" y=\"" << num(y + 4) << "\">" << label(std_max * f)
      << "</text>\n";
    s << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
      << label(x_max * f) << "</text>\n";
  }
  s << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 8)
    << "\" text-anchor=\"middle\">minimum power (mW)</text>\n";
  s << "<text x=\"14\" y=\"" << num(top + ph / 2) << "\" transform=\"rotate(-90 14 " << num(top + ph / 2)
    << ")\" text-anchor=\"middle\" fill=\"#1f4e9c\">relative error (%)</text>\n";
  s << "<text x=\"" << num(W - 14) << "\" y=\"" << num(top + ph / 2) << "\" transform=\"rotate(90 "
    << num(W - 14) << " " << num(top + ph / 2)
    << ")\" text-anchor=\"middle\" fill=\"#c0392b\">standard error (mW)</text>\n";
  s << lines([](const ErrorSummary& e) { return e.e_rel * 100; }, rel_max, "#1f4e9c");
  s << lines([](const ErrorSummary& e) { return e.e_std * 1e3; }, std_max, "#c0392b");
  s << "</svg>\n";
  return s.str();
}

}  // namespace thermopower
