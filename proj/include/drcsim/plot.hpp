#pragma once

#include <span>
#include <string>
#include <vector>

namespace drcsim {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // same length as x; non-finite points break the line
};

// Self-contained SVG line chart (axes, ticks, grid, legend). Plots are a
// best-effort visual aid; the CSV files are the data of record.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, std::span<const PlotSeries> series);

}  // namespace drcsim
