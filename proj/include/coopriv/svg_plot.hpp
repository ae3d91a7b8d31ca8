#pragma once

#include <string>
#include <vector>

namespace coopriv {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Hand-emitted SVG line chart. Every data point is a <circle> carrying
/// data-series, data-x and data-y attributes formatted exactly as the CSV
/// writers format numbers, so plotted points can be matched back to rows.
std::string render_svg(const LineChart& chart);

}  // namespace coopriv
