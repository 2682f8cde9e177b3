#pragma once

#include <string>
#include <vector>

namespace shortrate::cli {

struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string colour = "#1f4e9a";
    double width = 1.2;
    bool dashed = false;
    std::string label;
};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

/// Static SVG 1.1 document with the panels laid out in a grid of `columns`.
std::string render_svg(const std::vector<Panel>& panels, int columns, double panel_width = 460.0,
                       double panel_height = 320.0);

void write_svg(const std::string& path, const std::string& document);

}  // namespace shortrate::cli
