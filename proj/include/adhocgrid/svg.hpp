#pragma once

#include <string>
#include <vector>

namespace adhocgrid {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  int width = 860;
  int height = 480;
};

// Self-contained polyline chart with axes, 1-2-5 ticks, grid and legend.
std::string render_line_chart(const SvgChart& chart);
void write_line_chart(const std::string& path, const SvgChart& chart);

}  // namespace adhocgrid
