#pragma once

#include <string>
#include <vector>

namespace nvlab {

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> yError;  // optional, same length as y
  std::string label;
  std::string color = "#1f77b4";
  bool markers = true;  // false draws a polyline
};

// Self-contained SVG line/scatter plot.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title,
                       const std::string& xLabel, const std::string& yLabel);

}  // namespace nvlab
