#include "chinchilla/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "chinchilla/errors.hpp"

namespace chinchilla {
namespace {

constexpr double kPanelWidth = 520.0;
constexpr double kPanelHeight = 360.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;  // legend column
constexpr double kTop = 36.0;
constexpr double kBottom = 52.0;

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                               "#bcbd22", "#17becf"};

std::string fmt(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

std::string tick_label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4g", v);
  return buffer;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(ch);
    }
  }
  return out;
}

// Maps data values to [0, 1] along one axis.
struct Axis {
  bool log = false;
  double lo = 0.0;  // transformed units
  double hi = 1.0;

  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  double transform(double v) const { return log ? std::log10(v) : v; }
  double unit(double v) const { return (transform(v) - lo) / (hi - lo); }
};

Axis make_axis(const std::vector<const std::vector<double>*>& columns, bool log) {
  Axis axis;
  axis.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto* column : columns) {
    for (double v : *column) {
      if (!axis.usable(v)) continue;
      lo = std::min(lo, axis.transform(v));
      hi = std::max(hi, axis.transform(v));
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    const double pad = std::max(std::abs(lo) * 0.05, log ? 0.5 : 1e-3);
    lo -= pad;
    hi += pad;
  }
  if (log) {
    lo = std::floor(lo);
    hi = std::ceil(hi);
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  axis.lo = lo;
  axis.hi = hi;
  return axis;
}

// Tick positions in data units.
std::vector<double> ticks(const Axis& axis) {
  std::vector<double> out;
  if (axis.log) {
    const int lo = static_cast<int>(std::lround(axis.lo));
    const int hi = static_cast<int>(std::lround(axis.hi));
    const int stride = std::max(1, (hi - lo + 7) / 8);
    for (int k = lo; k <= hi; k += stride) out.push_back(std::pow(10.0, k));
    return out;
  }
  const double raw = (axis.hi - axis.lo) / 6.0;
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
  double step = magnitude;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * magnitude;
    if (step >= raw) break;
  }
  for (double t = std::ceil(axis.lo / step) * step; t <= axis.hi + 1e-9 * step; t += step) {
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return out;
}

void render_panel(std::string& out, const Panel& panel, double ox, double oy) {
  std::vector<const std::vector<double>*> xs;
  std::vector<const std::vector<double>*> ys;
  for (const Series& s : panel.series) {
    xs.push_back(&s.x);
    ys.push_back(&s.y);
    if (!s.lower.empty()) ys.push_back(&s.lower);
    if (!s.upper.empty()) ys.push_back(&s.upper);
  }
  const Axis ax = make_axis(xs, panel.style.log_x);
  const Axis ay = make_axis(ys, panel.style.log_y);
  const double plot_w = kPanelWidth - kLeft - kRight;
  const double plot_h = kPanelHeight - kTop - kBottom;
  const double x0 = ox + kLeft;
  const double y0 = oy + kTop;
  auto px = [&](double v) { return x0 + ax.unit(v) * plot_w; };
  auto py = [&](double v) { return y0 + (1.0 - ay.unit(v)) * plot_h; };

  out += "<g class=\"panel\">\n";
  out += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(plot_w) +
         "\" height=\"" + fmt(plot_h) + "\" fill=\"none\" stroke=\"#000000\"/>\n";
  out += "<text x=\"" + fmt(x0 + plot_w / 2) + "\" y=\"" + fmt(oy + 22) +
         "\" text-anchor=\"middle\" font-size=\"14\">" + escape(panel.style.title) + "</text>\n";

  for (double t : ticks(ax)) {
    if (ax.unit(t) < -1e-9 || ax.unit(t) > 1 + 1e-9) continue;
    const double x = px(t);
    out += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(y0 + plot_h) + "\" x2=\"" + fmt(x) +
           "\" y2=\"" + fmt(y0 + plot_h + 5) + "\" stroke=\"#000000\"/>\n";
    out += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y0 + plot_h + 18) +
           "\" text-anchor=\"middle\" font-size=\"10\">";
    if (ax.log) {
      out += "10<tspan baseline-shift=\"super\" font-size=\"8\">" +
             std::to_string(std::lround(std::log10(t))) + "</tspan>";
    } else {
      out += tick_label(t);
    }
    out += "</text>\n";
  }
  for (double t : ticks(ay)) {
    if (ay.unit(t) < -1e-9 || ay.unit(t) > 1 + 1e-9) continue;
    const double y = py(t);
    out += "<line x1=\"" + fmt(x0 - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(x0) +
           "\" y2=\"" + fmt(y) + "\" stroke=\"#000000\"/>\n";
    out += "<text x=\"" + fmt(x0 - 8) + "\" y=\"" + fmt(y + 3) +
           "\" text-anchor=\"end\" font-size=\"10\">";
    if (ay.log) {
      out += "10<tspan baseline-shift=\"super\" font-size=\"8\">" +
             std::to_string(std::lround(std::log10(t))) + "</tspan>";
    } else {
      out += tick_label(t);
    }
    out += "</text>\n";
  }
  out += "<text x=\"" + fmt(x0 + plot_w / 2) + "\" y=\"" + fmt(oy + kPanelHeight - 12) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + escape(panel.style.x_label) +
         "</text>\n";
  out += "<text x=\"" + fmt(ox + 16) + "\" y=\"" + fmt(y0 + plot_h / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " + fmt(ox + 16) +
         " " + fmt(y0 + plot_h / 2) + ")\">" + escape(panel.style.y_label) + "</text>\n";

  for (std::size_t k = 0; k < panel.series.size(); ++k) {
    const Series& s = panel.series[k];
    const std::string color = kPalette[k % kPalette.size()];
    const bool has_bounds = !s.lower.empty() && s.lower.size() == s.y.size() &&
                            s.upper.size() == s.y.size();
    auto placeable = [&](std::size_t i, double y) { return ax.usable(s.x[i]) && ay.usable(y); };

    if (has_bounds && !s.markers) {
      std::string upper_path;
      std::string lower_path;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!placeable(i, s.lower[i]) || !placeable(i, s.upper[i])) continue;
        upper_path += fmt(px(s.x[i])) + "," + fmt(py(s.upper[i])) + " ";
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        if (!placeable(i, s.lower[i]) || !placeable(i, s.upper[i])) continue;
        lower_path += fmt(px(s.x[i])) + "," + fmt(py(s.lower[i])) + " ";
      }
      if (!upper_path.empty()) {
        upper_path.pop_back();
        out += "<polygon points=\"" + upper_path + " " + lower_path.substr(0, lower_path.size() - 1) +
               "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
      }
    }

    // Consecutive placeable points form one polyline.
    std::vector<std::string> segments;
    std::string current;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!placeable(i, s.y[i])) {
        if (!current.empty()) segments.push_back(std::move(current));
        current.clear();
        continue;
      }
      if (!current.empty()) current.push_back(' ');
      current += fmt(px(s.x[i])) + "," + fmt(py(s.y[i]));
    }
    if (!current.empty()) segments.push_back(std::move(current));
    for (const std::string& points : segments) {
      out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
    }

    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!placeable(i, s.y[i])) continue;
        if (has_bounds && placeable(i, s.lower[i]) && placeable(i, s.upper[i])) {
          out += "<line x1=\"" + fmt(px(s.x[i])) + "\" y1=\"" + fmt(py(s.lower[i])) +
                 "\" x2=\"" + fmt(px(s.x[i])) + "\" y2=\"" + fmt(py(s.upper[i])) +
                 "\" stroke=\"" + color + "\"/>\n";
        }
        out += "<circle cx=\"" + fmt(px(s.x[i])) + "\" cy=\"" + fmt(py(s.y[i])) +
               "\" r=\"3\" fill=\"" + color + "\"/>\n";
      }
    }

    const double ly = y0 + 10 + 16.0 * static_cast<double>(k);
    const double lx = x0 + plot_w + 12;
    out += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 18) +
           "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fmt(lx + 24) + "\" y=\"" + fmt(ly + 4) + "\" font-size=\"10\">" +
           escape(s.label) + "</text>\n";
  }
  out += "</g>\n";
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("failed while writing '" + path.string() + "'");
}

}  // namespace

std::string render_svg(std::span<const Panel> panels, int columns) {
  if (panels.empty()) throw InputError("nothing to plot");
  columns = std::max(1, std::min<int>(columns, static_cast<int>(panels.size())));
  const auto rows = (static_cast<int>(panels.size()) + columns - 1) / columns;
  const double width = kPanelWidth * columns;
  const double height = kPanelHeight * rows;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(width) +
         "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) +
         "\" font-family=\"sans-serif\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
         "\" fill=\"#ffffff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const auto col = static_cast<double>(static_cast<int>(i) % columns);
    const auto row = static_cast<double>(static_cast<int>(i) / columns);
    render_panel(out, panels[i], col * kPanelWidth, row * kPanelHeight);
  }
  out += "</svg>\n";
  return out;
}

void write_svg_plot(std::span<const Series> series, const PlotStyle& style,
                    const std::filesystem::path& path) {
  if (series.empty()) throw InputError("nothing to plot");
  const Panel panel{style, {series.begin(), series.end()}};
  write_text(render_svg(std::span<const Panel>(&panel, 1), 1), path);
}

void write_svg_panels(std::span<const Panel> panels, int columns,
                      const std::filesystem::path& path) {
  write_text(render_svg(panels, columns), path);
}

}  // namespace chinchilla
