#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace chinchilla {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  // Optional lower/upper values: a shaded band for lines, error bars for
  // markers. Either both empty or both sized like y.
  std::vector<double> lower;
  std::vector<double> upper;
  bool markers = false;
};

struct PlotStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

struct Panel {
  PlotStyle style;
  std::vector<Series> series;
};

// Panels laid out row-major in a grid with the given column count. Points
// that cannot be placed (non-finite, or nonpositive on a log axis) break the
// polyline. Output is a pure function of the inputs.
std::string render_svg(std::span<const Panel> panels, int columns = 1);

// Throws InputError when there is nothing to plot or the file cannot be
// written.
void write_svg_plot(std::span<const Series> series, const PlotStyle& style,
                    const std::filesystem::path& path);
void write_svg_panels(std::span<const Panel> panels, int columns,
                      const std::filesystem::path& path);

}  // namespace chinchilla
