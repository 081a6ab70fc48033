#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aoi::cli {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Writes a standalone SVG line chart: one polyline per series, linear axes
/// with five ticks each, legend in the top-right corner.
void write_svg_plot(std::ostream& os,
                    const std::vector<PlotSeries>& series,
                    const std::string& title,
                    const std::string& x_label,
                    const std::string& y_label);

}  // namespace aoi::cli
