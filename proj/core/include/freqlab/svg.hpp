#pragma once

#include <string>
#include <vector>

namespace freqlab {

// Fixed plot box, SVG user units. Data min/max map exactly to the box edges.
inline constexpr double kSvgWidth = 660.0;
inline constexpr double kSvgHeight = 500.0;
inline constexpr double kPlotX0 = 60.0;
inline constexpr double kPlotX1 = 600.0;
inline constexpr double kPlotY0 = 40.0;   // top edge (data max)
inline constexpr double kPlotY1 = 440.0;  // bottom edge (data min)

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> yerr;  // optional, same length as y or empty
  double marker_x = -1.0;    // x of the highlighted point, < 0 for none
};

// Standalone SVG line chart: one polyline per series, error bars, highlighted
// marker. No timestamps, so identical data gives identical bytes.
void emit_plot_svg(const std::vector<PlotSeries>& series,
                   const std::string& x_label, const std::string& y_label,
                   const std::string& path);

}  // namespace freqlab
