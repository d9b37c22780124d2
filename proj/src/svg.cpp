#include "twodelay/svg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "twodelay/errors.hpp"

namespace twodelay {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void widen_if_flat() {
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

}  // namespace

void write_svg_plot(std::ostream& os, std::span<const double> xs, std::span<const double> ys,
                    const PlotStyle& style) {
    if (xs.size() != ys.size()) throw ParameterError("plot needs equally many x and y values");
    Range rx, ry;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
        rx.lo = std::min(rx.lo, xs[i]);
        rx.hi = std::max(rx.hi, xs[i]);
        ry.lo = std::min(ry.lo, ys[i]);
        ry.hi = std::max(ry.hi, ys[i]);
    }
    if (!std::isfinite(rx.lo)) rx = {0.0, 1.0};
    if (!std::isfinite(ry.lo)) ry = {0.0, 1.0};
    rx.widen_if_flat();
    ry.widen_if_flat();

    const double w = style.width, h = style.height;
    const double left = 70, right = 20, top = 40, bottom = 50;
    const double pw = w - left - right, ph = h - top - bottom;
    auto sx = [&](double x) { return left + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto sy = [&](double y) { return top + (ry.hi - y) / (ry.hi - ry.lo) * ph; };

    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
       << style.height << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << escape(style.title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<g font-size=\"11\">\n";
    os << "<text x=\"" << left << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"start\">" << rx.lo << "</text>\n";
    os << "<text x=\"" << left + pw << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"end\">" << rx.hi
       << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << top + ph << "\" text-anchor=\"end\">" << ry.lo << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">" << ry.hi << "</text>\n";
    os << "</g>\n";
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
       << escape(style.x_label) << "</text>\n";
    os << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
       << top + ph / 2 << ")\">" << escape(style.y_label) << "</text>\n";

    if (style.line) {
        os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"0.8\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
            if (!first) os << ' ';
            os << sx(xs[i]) << ',' << sy(ys[i]);
            first = false;
        }
        os << "\"/>\n";
    } else {
        os << "<g fill=\"black\">\n";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
            os << "<circle cx=\"" << sx(xs[i]) << "\" cy=\"" << sy(ys[i]) << "\" r=\"0.7\"/>\n";
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
}

}  // namespace twodelay
