#pragma once

#include <string>
#include <vector>

namespace gridloop::bench {

struct PlotPoint {
    double x = 0;
    double mean = 0;
    double sd = 0;
};

/// Static mean +- sd line plot; empty input renders bare axes.
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotPoint>& points);

}  // namespace gridloop::bench
