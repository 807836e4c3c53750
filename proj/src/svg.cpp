#include "gridloop/bench/svg.hpp"

#include <algorithm>
#include <cstdio>

namespace gridloop::bench {

namespace {
constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}
}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotPoint>& points) {
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    if (!points.empty()) {
        x_min = x_max = points[0].x;
        y_min = 0;
        y_max = points[0].mean + points[0].sd;
        for (const auto& p : points) {
            x_min = std::min(x_min, p.x);
            x_max = std::max(x_max, p.x);
            y_max = std::max(y_max, p.mean + p.sd);
        }
        if (x_max == x_min) x_max = x_min + 1;
        if (y_max <= y_min) y_max = y_min + 1;
        y_max *= 1.05;
    }
    auto sx = [&](double x) {
        return kLeft + (x - x_min) / (x_max - x_min) * (kWidth - kLeft - kRight);
    };
    auto sy = [&](double y) {
        return kHeight - kBottom - (y - y_min) / (y_max - y_min) * (kHeight - kTop - kBottom);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
           "viewBox=\"0 0 640 420\">\n";
    svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + title + "</text>\n";
    // axes
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" +
           num(kWidth - kRight) + "\" y2=\"" + num(kHeight - kBottom) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) +
           "\" y2=\"" + num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + num(kHeight - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + x_label +
           "</text>\n";
    svg += "<text x=\"18\" y=\"" + num((kTop + kHeight - kBottom) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 18 " + num((kTop + kHeight - kBottom) / 2) + ")\">" + y_label +
           "</text>\n";

    if (points.empty()) {
        svg += "<text x=\"320\" y=\"220\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"14\" fill=\"#888\">no data</text>\n</svg>\n";
        return svg;
    }

    // axis extremes as tick labels
    svg += "<text x=\"" + num(kLeft) + "\" y=\"" + num(kHeight - kBottom + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + num(x_min) +
           "</text>\n";
    svg += "<text x=\"" + num(kWidth - kRight) + "\" y=\"" + num(kHeight - kBottom + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + num(x_max) +
           "</text>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(kHeight - kBottom) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(y_min) +
           "</text>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(kTop + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(y_max) +
           "</text>\n";

    for (const auto& p : points) {  // sd whiskers
        if (p.sd <= 0) continue;
        svg += "<line x1=\"" + num(sx(p.x)) + "\" y1=\"" + num(sy(p.mean - p.sd)) + "\" x2=\"" +
               num(sx(p.x)) + "\" y2=\"" + num(sy(p.mean + p.sd)) +
               "\" stroke=\"#4477aa\" stroke-width=\"1\"/>\n";
    }
    std::string poly;
    for (const auto& p : points) poly += num(sx(p.x)) + "," + num(sy(p.mean)) + " ";
    svg += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"#4477aa\" "
           "stroke-width=\"2\"/>\n";
    for (const auto& p : points)
        svg += "<circle cx=\"" + num(sx(p.x)) + "\" cy=\"" + num(sy(p.mean)) +
               "\" r=\"3\" fill=\"#4477aa\"/>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace gridloop::bench
