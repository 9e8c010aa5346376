#pragma once

#include <string>
#include <vector>

namespace pricelab {

struct SvgSeries {
    std::string label;
    std::vector<double> x, y;
    std::vector<double> band; // per-point std dev for a shaded band; may be empty
};

//! Self-contained log-log SVG plot with decade gridlines, shaded +-1 band
//! polygons, and a legend. Pure function of its inputs: byte-identical
//! output for identical data. Nonpositive values are clamped to a floor one
//! decade below the smallest positive value so degenerate curves still plot.
std::string loglog_svg(const std::vector<SvgSeries>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

} // namespace pricelab
