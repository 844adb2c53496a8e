#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qbatt/csv.hpp"

namespace qbatt {

// Minimal data-first SVG scatter/line plot, enough to eyeball CSV output
// without external tooling.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool line = true;
  bool markers = true;
};

inline std::string render_svg_plot(const std::string& title, const std::string& x_label,
                                   const std::string& y_label,
                                   const std::vector<PlotSeries>& series) {
  constexpr double width = 640, height = 440;
  constexpr double ml = 70, mr = 20, mt = 40, mb = 50;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool any = false;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!any) {
        x_min = x_max = s.x[i];
        y_min = y_max = s.y[i];
        any = true;
      }
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
  auto sy = [&](double y) {
    return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
  };
  auto num = [&](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"440\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + title +
         "</text>\n";
  svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(height - mb) + "\" x2=\"" +
         num(width - mr) + "\" y2=\"" + num(height - mb) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) +
         "\" y2=\"" + num(height - mb) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + i * (x_max - x_min) / 4;
    const double yv = y_min + i * (y_max - y_min) / 4;
    svg += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(height - mb + 16) +
           "\" text-anchor=\"middle\">" + num(xv) + "</text>\n";
    svg += "<text x=\"" + num(ml - 6) + "\" y=\"" + num(sy(yv) + 4) +
           "\" text-anchor=\"end\">" + num(yv) + "</text>\n";
  }
  svg += "<text x=\"" + num((ml + width - mr) / 2) + "\" y=\"" + num(height - 10) +
         "\" text-anchor=\"middle\">" + x_label + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num((mt + height - mb) / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num((mt + height - mb) / 2) + ")\">" + y_label + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % 8];
    if (s.line && s.x.size() > 1) {
      svg += "<polyline fill=\"none\" stroke=\"";
      svg += color;
      svg += "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        svg += num(sx(s.x[i])) + "," + num(sy(s.y[i])) + " ";
      svg += "\"/>\n";
    }
    if (s.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        svg += "<circle cx=\"" + num(sx(s.x[i])) + "\" cy=\"" + num(sy(s.y[i])) +
               "\" r=\"3\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + num(width - mr - 6) + "\" y=\"" + num(mt + 16 + 16 * k) +
           "\" text-anchor=\"end\" fill=\"" + color + "\">" + s.label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace qbatt
