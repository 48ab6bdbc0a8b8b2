// Minimal standalone SVG line charts.
#pragma once

#include <string>
#include <vector>

namespace csmlab {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 800;
  int height = 500;
};

/// Renders the series as an SVG document. Output depends only on the inputs.
/// Non-finite points, and non-positive points on a log axis, are skipped.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& options);

}  // namespace csmlab
