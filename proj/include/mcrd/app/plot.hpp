#pragma once

#include <string>
#include <vector>

namespace mcrd::app {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;  ///< scatter points instead of a polyline
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool zero_axes = false;  ///< draw the x = 0 and y = 0 lines when in range
};

/// Standalone SVG document. Output depends only on the input values.
std::string render_svg(const PlotSpec& spec);

}  // namespace mcrd::app
