#include "peerperf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "peerperf/errors.hpp"

namespace peerperf {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string render_ratio_svg(const RatioSeries& series, const std::string& title) {
    const std::size_t n = series.values.size();
    if (n == 0 || series.months.size() != n) {
        throw ValidationError("series is empty or misaligned");
    }

    const double width = 800, height = 480;
    const double left = 70, right = 20, top = 50, bottom = 55;
    const double pw = width - left - right;
    const double ph = height - top - bottom;

    double lo = series.values[0] * 100.0, hi = lo;
    for (double v : series.values) {
        lo = std::min(lo, v * 100.0);
        hi = std::max(hi, v * 100.0);
    }
    double pad = std::max(1.0, (hi - lo) * 0.10);
    double y0 = std::max(0.0, lo - pad);
    double y1 = hi + pad;

    auto xpos = [&](std::size_t i) {
        return n == 1 ? left + pw / 2
                      : left + pw * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    auto ypos = [&](double pct) { return top + ph * (1.0 - (pct - y0) / (y1 - y0)); };

    // Least-squares trend on the percent scale.
    double slope = 0.0, intercept = series.values[0] * 100.0;
    if (n > 1) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double x = static_cast<double>(i);
            double y = series.values[i] * 100.0;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double dn = static_cast<double>(n);
        double denom = dn * sxx - sx * sx;
        slope = denom != 0.0 ? (dn * sxy - sx * sy) / denom : 0.0;
        intercept = (sy - slope * sx) / dn;
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
        << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // Axes.
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
        << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw
        << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n";

    // Y ticks (percent).
    for (int k = 0; k <= 4; ++k) {
        double pct = y0 + (y1 - y0) * k / 4.0;
        double y = ypos(pct);
        svg << "<line x1=\"" << left - 4 << "\" y1=\"" << num(y) << "\" x2=\"" << left
            << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << num(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
            << num(pct) << "%</text>\n";
    }

    // X labels: first and last month, plus January ticks in between.
    svg << "<text x=\"" << num(xpos(0)) << "\" y=\"" << top + ph + 20
        << "\" text-anchor=\"start\" font-family=\"sans-serif\" font-size=\"12\">"
        << series.months.front().to_string() << "</text>\n";
    if (n > 1) {
        svg << "<text x=\"" << num(xpos(n - 1)) << "\" y=\"" << top + ph + 20
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
            << series.months.back().to_string() << "</text>\n";
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (series.months[i].month() == 1) {
            svg << "<line x1=\"" << num(xpos(i)) << "\" y1=\"" << top + ph << "\" x2=\""
                << num(xpos(i)) << "\" y2=\"" << top + ph + 4 << "\" stroke=\"black\"/>\n";
        }
    }
    svg << "<text x=\"22\" y=\"" << top + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 22 " << top + ph / 2 << ")\">" << to_string(series.metric)
        << " (%)</text>\n";

    // Series path.
    svg << "<path d=\"";
    for (std::size_t i = 0; i < n; ++i) {
        svg << (i == 0 ? "M" : " L") << num(xpos(i)) << " "
            << num(ypos(series.values[i] * 100.0));
    }
    svg << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";

    // Dashed trend path.
    double t0v = std::clamp(intercept, y0, y1);
    double t1v = std::clamp(intercept + slope * static_cast<double>(n - 1), y0, y1);
    svg << "<path d=\"M" << num(xpos(0)) << " " << num(ypos(t0v)) << " L"
        << num(xpos(n - 1)) << " " << num(ypos(t1v))
        << "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" "
           "stroke-dasharray=\"6 4\"/>\n";

    svg << "</svg>\n";
    return svg.str();
}

void write_ratio_svg(const RatioSeries& series, const std::string& title,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << render_ratio_svg(series, title);
}

}  // namespace peerperf
