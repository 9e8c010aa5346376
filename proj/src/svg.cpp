#include "pricelab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace pricelab {

namespace {

constexpr double canvas_w = 860, canvas_h = 600;
constexpr double m_left = 72, m_right = 180, m_top = 44, m_bottom = 56;

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                         "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int palette_n = 6;

std::string fmt(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double decade)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(decade)));
    return buf;
}

struct LogScale {
    double lo = 0, hi = 1; // log10 bounds
    double px_lo = 0, px_hi = 1;
    double map(double v) const
    {
        double t = (std::log10(v) - lo) / (hi - lo);
        return px_lo + t * (px_hi - px_lo);
    }
};

} // namespace

std::string loglog_svg(const std::vector<SvgSeries>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label)
{
    double min_pos_x = std::numeric_limits<double>::infinity(), max_x = 0;
    double min_pos_y = std::numeric_limits<double>::infinity(), max_y = 0;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("svg: x/y length mismatch");
        if (!s.band.empty() && s.band.size() != s.y.size())
            throw std::invalid_argument("svg: band length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (s.x[i] > 0) {
                min_pos_x = std::min(min_pos_x, s.x[i]);
                max_x = std::max(max_x, s.x[i]);
            }
            double top = s.y[i] + (s.band.empty() ? 0.0 : s.band[i]);
            if (s.y[i] > 0)
                min_pos_y = std::min(min_pos_y, s.y[i]);
            if (top > 0)
                max_y = std::max(max_y, top);
        }
    }
    if (!(max_x > 0))
        throw std::invalid_argument("svg: no positive x values");
    if (!(max_y > 0)) { // all-zero curves: fabricate a unit range
        min_pos_y = 0.1;
        max_y = 10;
    }
    double y_floor = min_pos_y / 10.0;

    LogScale xs, ys;
    xs.lo = std::log10(min_pos_x) - 0.02;
    xs.hi = std::log10(max_x) + 0.02;
    xs.px_lo = m_left;
    xs.px_hi = canvas_w - m_right;
    ys.lo = std::log10(y_floor) - 0.02;
    ys.hi = std::log10(max_y) + 0.08;
    ys.px_lo = canvas_h - m_bottom; // SVG y axis points down
    ys.px_hi = m_top;
    if (xs.hi - xs.lo < 1e-9)
        xs.hi = xs.lo + 1;
    if (ys.hi - ys.lo < 1e-9)
        ys.hi = ys.lo + 1;

    auto clamp_y = [&](double v) { return v > y_floor ? v : y_floor; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(canvas_w) +
           "\" height=\"" + fmt(canvas_h) + "\" viewBox=\"0 0 " + fmt(canvas_w) + " " +
           fmt(canvas_h) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + fmt((m_left + canvas_w - m_right) / 2) + "\" y=\"24\" "
           "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           title + "</text>\n";

    // frame
    out += "<rect x=\"" + fmt(m_left) + "\" y=\"" + fmt(m_top) + "\" width=\"" +
           fmt(canvas_w - m_left - m_right) + "\" height=\"" +
           fmt(canvas_h - m_top - m_bottom) +
           "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    // decade gridlines and tick labels
    for (int d = static_cast<int>(std::ceil(xs.lo)); d <= std::floor(xs.hi); ++d) {
        double px = xs.px_lo + (d - xs.lo) / (xs.hi - xs.lo) * (xs.px_hi - xs.px_lo);
        out += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(m_top) + "\" x2=\"" + fmt(px) +
               "\" y2=\"" + fmt(canvas_h - m_bottom) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(canvas_h - m_bottom + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
               fmt_tick(d) + "</text>\n";
    }
    for (int d = static_cast<int>(std::ceil(ys.lo)); d <= std::floor(ys.hi); ++d) {
        double py = ys.px_lo + (d - ys.lo) / (ys.hi - ys.lo) * (ys.px_hi - ys.px_lo);
        out += "<line x1=\"" + fmt(m_left) + "\" y1=\"" + fmt(py) + "\" x2=\"" +
               fmt(canvas_w - m_right) + "\" y2=\"" + fmt(py) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + fmt(m_left - 6) + "\" y=\"" + fmt(py + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" +
               fmt_tick(d) + "</text>\n";
    }

    // axis labels
    out += "<text x=\"" + fmt((m_left + canvas_w - m_right) / 2) + "\" y=\"" +
           fmt(canvas_h - 14) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
           x_label + "</text>\n";
    out += "<text x=\"18\" y=\"" + fmt((m_top + canvas_h - m_bottom) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 18 " +
           fmt((m_top + canvas_h - m_bottom) / 2) + ")\">" + y_label + "</text>\n";

    // bands first so every line draws on top
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        if (s.band.empty() || s.x.empty())
            continue;
        const char* color = palette[si % palette_n];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts += fmt(xs.map(s.x[i])) + "," + fmt(ys.map(clamp_y(s.y[i] + s.band[i]))) + " ";
        for (std::size_t i = s.x.size(); i-- > 0;)
            pts += fmt(xs.map(s.x[i])) + "," + fmt(ys.map(clamp_y(s.y[i] - s.band[i]))) + " ";
        out += "<polygon points=\"" + pts + "\" fill=\"" + color +
               "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        if (s.x.empty())
            continue;
        const char* color = palette[si % palette_n];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts += fmt(xs.map(s.x[i])) + "," + fmt(ys.map(clamp_y(s.y[i]))) + " ";
        out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.8\"/>\n";
    }

    // legend
    double lx = canvas_w - m_right + 16, ly = m_top + 10;
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = palette[si % palette_n];
        out += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" +
               fmt(lx + 26) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2.5\"/>\n";
        out += "<text x=\"" + fmt(lx + 32) + "\" y=\"" + fmt(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + series[si].label +
               "</text>\n";
        ly += 20;
    }

    out += "</svg>\n";
    return out;
}

} // namespace pricelab
