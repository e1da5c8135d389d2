#include "freqlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "freqlab/errors.hpp"

namespace freqlab {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

void emit_plot_svg(const std::vector<PlotSeries>& series,
                   const std::string& x_label, const std::string& y_label,
                   const std::string& path) {
  if (series.empty()) throw EmptyInputError("emit_plot_svg: no series");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size())
      throw ShapeError("emit_plot_svg: series x/y size mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double lo = s.yerr.empty() ? s.y[i] : s.y[i] - s.yerr[i];
      const double hi = s.yerr.empty() ? s.y[i] : s.y[i] + s.yerr[i];
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, lo);
      ymax = std::max(ymax, hi);
    }
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const auto px = [&](double x) {
    return kPlotX0 + (x - xmin) / (xmax - xmin) * (kPlotX1 - kPlotX0);
  };
  const auto py = [&](double y) {
    return kPlotY1 - (y - ymin) / (ymax - ymin) * (kPlotY1 - kPlotY0);
  };

  std::ofstream out(path);
  if (!out) throw IoError("emit_plot_svg: cannot write " + path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth
      << "\" height=\"" << kSvgHeight << "\" viewBox=\"0 0 " << kSvgWidth
      << " " << kSvgHeight << "\">\n";
  out << "<rect x=\"" << kPlotX0 << "\" y=\"" << kPlotY0 << "\" width=\""
      << (kPlotX1 - kPlotX0) << "\" height=\"" << (kPlotY1 - kPlotY0)
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out << "<text x=\"" << (kPlotX0 + kPlotX1) / 2.0 << "\" y=\""
      << (kPlotY1 + 40.0)
      << "\" text-anchor=\"middle\" font-size=\"14\">" << x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (kPlotY0 + kPlotY1) / 2.0
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
      << (kPlotY0 + kPlotY1) / 2.0 << ")\">" << y_label << "</text>\n";

  // Axis extreme tick labels.
  out << "<text x=\"" << kPlotX0 << "\" y=\"" << (kPlotY1 + 18.0)
      << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xmin)
      << "</text>\n";
  out << "<text x=\"" << kPlotX1 << "\" y=\"" << (kPlotY1 + 18.0)
      << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xmax)
      << "</text>\n";
  out << "<text x=\"" << (kPlotX0 - 6.0) << "\" y=\"" << (kPlotY1 + 4.0)
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(ymin)
      << "</text>\n";
  out << "<text x=\"" << (kPlotX0 - 6.0) << "\" y=\"" << (kPlotY0 + 4.0)
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(ymax)
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (s.x.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) out << " ";
        out << fmt(px(s.x[i])) << "," << fmt(py(s.y[i]));
      }
      out << "\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!s.yerr.empty() && s.yerr[i] > 0.0) {
        out << "<line x1=\"" << fmt(px(s.x[i])) << "\" y1=\""
            << fmt(py(s.y[i] - s.yerr[i])) << "\" x2=\"" << fmt(px(s.x[i]))
            << "\" y2=\"" << fmt(py(s.y[i] + s.yerr[i])) << "\" stroke=\""
            << color << "\" stroke-width=\"1\"/>\n";
      }
      const bool starred = s.marker_x >= 0.0 && s.x[i] == s.marker_x;
      out << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\""
          << fmt(py(s.y[i])) << "\" r=\"" << (starred ? 6 : 3)
          << "\" fill=\"" << (starred ? "none" : color) << "\" stroke=\""
          << color << "\" stroke-width=\"2\"/>\n";
    }
    out << "<text x=\"" << (kPlotX1 - 120.0) << "\" y=\""
        << (kPlotY0 + 18.0 + 16.0 * static_cast<double>(si))
        << "\" font-size=\"12\" fill=\"" << color << "\">" << s.label
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("emit_plot_svg: write failed " + path);
}

}  // namespace freqlab
