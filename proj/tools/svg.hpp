#pragma once

#include <string>
#include <vector>

namespace repdyn {

// Deterministic SVG line plots: fixed geometry, fixed palette, fixed number
// formatting, so identical inputs yield identical bytes.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  // Optional confidence band; when non-empty, same length as x.
  std::vector<double> band_lo;
  std::vector<double> band_hi;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<std::string> annotations;  // rendered under the title
  bool fixed_range = false;              // else ranges fit the data
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
};

// One panel per entry, laid out left to right.
std::string render_plots(const std::vector<PlotSpec>& plots);

}  // namespace repdyn
