#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gridwave::svg {

/// One curve; with markers set the points are drawn as dots instead of a
/// polyline (used for pole/zero scatters).
struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    std::vector<Series> series;
};

/// Renders a self-contained SVG line/scatter plot. Non-finite samples break
/// the polyline; non-positive x values are dropped on log axes.
void write_plot(const std::filesystem::path& path, const PlotSpec& spec);

}  // namespace gridwave::svg
