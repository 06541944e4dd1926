#pragma once

// Minimal deterministic SVG line plots.

#include "propwing/csv.hpp"
#include "propwing/planform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace propwing::svg {

struct Series {
    std::string label;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

struct Plot {
    std::string title, x_label, y_label;
    std::vector<Series> series;
    bool equal_aspect = false;  // same scale on both axes (planform outlines)
};

namespace detail {

inline std::string num(double v) { return csv::format_fixed(v, 2); }

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

/// Tick spacing of 1, 2 or 5 times a power of ten giving about five ticks.
inline double tick_step(double span) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0}) {
        if (m * mag >= raw) return m * mag;
    }
    return 10.0 * mag;
}

}  // namespace detail

inline std::string render(const Plot& plot, int width = 640, int height = 420) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : plot.series) {
        for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
        for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
    if (!(x1 > x0)) x0 -= 1.0, x1 += 1.0;
    if (!(y1 > y0)) y0 -= 1.0, y1 += 1.0;
    const double pad_y = 0.05 * (y1 - y0);
    y0 -= pad_y;
    y1 += pad_y;

    const double left = 70, right = 20, top = 40, bottom = 55;
    double pw = width - left - right;
    double ph = height - top - bottom;
    if (plot.equal_aspect) {
        const double k = std::min(pw / (x1 - x0), ph / (y1 - y0));
        pw = k * (x1 - x0);
        ph = k * (y1 - y0);
    }
    const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    const auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << detail::escape(plot.title) << "</text>\n";
    out << "<rect x=\"" << detail::num(left) << "\" y=\"" << detail::num(top) << "\" width=\"" << detail::num(pw)
        << "\" height=\"" << detail::num(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";

    const double xs = detail::tick_step(x1 - x0), ys = detail::tick_step(y1 - y0);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
        out << "<line x1=\"" << detail::num(px(t)) << "\" y1=\"" << detail::num(top) << "\" x2=\"" << detail::num(px(t))
            << "\" y2=\"" << detail::num(top + ph) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << detail::num(px(t)) << "\" y=\"" << detail::num(top + ph + 16)
            << "\" text-anchor=\"middle\">" << csv::format(std::abs(t) < 1e-12 ? 0.0 : std::round(t / xs) * xs)
            << "</text>\n";
    }
    for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
        out << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(py(t)) << "\" x2=\"" << detail::num(left + pw)
            << "\" y2=\"" << detail::num(py(t)) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << detail::num(left - 6) << "\" y=\"" << detail::num(py(t) + 4)
            << "\" text-anchor=\"end\">" << csv::format(std::abs(t) < 1e-12 ? 0.0 : std::round(t / ys) * ys)
            << "</text>\n";
    }
    out << "<text x=\"" << detail::num(left + pw / 2) << "\" y=\"" << detail::num(top + ph + 38)
        << "\" text-anchor=\"middle\">" << detail::escape(plot.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << detail::num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << detail::num(top + ph / 2) << ")\">" << detail::escape(plot.y_label) << "</text>\n";

    int legend_row = 0;
    for (const auto& s : plot.series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\"";
        if (s.dashed) out << " stroke-dasharray=\"6 4\"";
        out << " points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            out << (i ? " " : "") << detail::num(px(s.x[i])) << ',' << detail::num(py(s.y[i]));
        }
        out << "\"/>\n";
        if (!s.label.empty()) {
            const double ly = top + 14 + 16 * legend_row++;
            out << "<line x1=\"" << detail::num(left + pw - 150) << "\" y1=\"" << detail::num(ly - 4) << "\" x2=\""
                << detail::num(left + pw - 126) << "\" y2=\"" << detail::num(ly - 4) << "\" stroke=\"" << s.color
                << "\" stroke-width=\"1.6\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
            out << "<text x=\"" << detail::num(left + pw - 120) << "\" y=\"" << detail::num(ly) << "\">"
                << detail::escape(s.label) << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

/// Closed semi-span outline drawn about a straight, unswept quarter-chord
/// line; x is spanwise, y streamwise with the leading edge up.
inline Series planform_outline(const WingPlanform& p, std::string label, std::string color, bool dashed = false) {
    const auto g = snapshot(p);
    Series s{std::move(label), {}, {}, std::move(color), dashed};
    for (std::size_t i = 0; i < g.y.size(); ++i) {
        s.x.push_back(g.y[i]);
        s.y.push_back(0.25 * g.chord[i]);
    }
    for (std::size_t i = g.y.size(); i-- > 0;) {
        s.x.push_back(g.y[i]);
        s.y.push_back(-0.75 * g.chord[i]);
    }
    s.x.push_back(s.x.front());
    s.y.push_back(s.y.front());
    return s;
}

}  // namespace propwing::svg
