#pragma once

#include <span>
#include <string>

#include "everrod/virtual_lab.hpp"

namespace everrod {

struct PlotStyle {
  std::string title = "Tip force vs displacement";
  int width = 640;
  int height = 420;
};

// Force-displacement plot: x axis in mm, y axis in N, one polyline and one
// legend entry per curve. Output depends only on the inputs.
std::string plot_curves(std::span<const ForceDisplacementCurve> curves,
                        const PlotStyle& style = {});

}  // namespace everrod
