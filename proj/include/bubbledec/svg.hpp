#pragma once

#include <string>
#include <vector>

namespace bubbledec {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal deterministic SVG line plot (one file per diagnostic curve).
std::string render_line_plot(const std::string& title,
                             const std::vector<PlotSeries>& series,
                             bool log_y = false);

}  // namespace bubbledec
