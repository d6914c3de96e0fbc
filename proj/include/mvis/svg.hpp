#pragma once

#include <string>
#include <vector>

#include "mvis/xi.hpp"

namespace mvis {

// Hand-rolled SVG output; no plotting dependency. All writers return the
// document as a string.

// W->0 kernel as vertical delta lines in an oblique 3D projection. Positive
// weights draw red, negative blue; when negative_scale > 1 the blue stems are
// magnified by that factor and the legend says so.
std::string plot_stem3(const DiscreteKernel& kernel, const std::string& title,
                       double negative_scale = 1.0);

// Field heatmap with a diverging blue-white-red map, white pinned at 0.
std::string plot_heatmap(const XiField& field, const std::string& title);

struct CurveSeries {
  std::string name;
  std::vector<double> x, y;
};

std::string plot_curve(const std::vector<CurveSeries>& series, const std::string& title,
                       const std::string& xlabel, const std::string& ylabel);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mvis
