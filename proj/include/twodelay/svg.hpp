#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace twodelay {

struct PlotStyle {
    std::string title;
    std::string x_label;
    std::string y_label;
    /// Polyline through the points in order; otherwise one dot per point.
    bool line = false;
    int width = 640;
    int height = 480;
};

/// Standalone SVG with axes, min/max tick labels and the data scaled to the plot area.
/// Non-finite points are skipped; a degenerate axis range is widened by one unit.
void write_svg_plot(std::ostream& os, std::span<const double> xs, std::span<const double> ys,
                    const PlotStyle& style);

}  // namespace twodelay
