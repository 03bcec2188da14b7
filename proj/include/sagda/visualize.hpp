#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sagda/error.hpp"
#include "sagda/table.hpp"

namespace sagda {

/// Chart geometry and styling. Rendering is plain SVG 1.1 text with a fixed
/// number format, so identical inputs produce identical bytes.
struct chart_spec {
    std::string title;
    std::string x_label;
    std::string y_label;
    size_t width = 640;
    size_t height = 400;
    size_t bins = 20;
    std::array<std::string, 2> ramp{"#f7fbff", "#08306b"};  // heatmap stops

    void validate() const {
        if (width == 0 || height == 0) fail(errc::invalid_spec, "chart needs width, height > 0");
        if (bins < 1) fail(errc::invalid_spec, "histogram needs bins >= 1");
    }
};

namespace svg {

inline std::string num(double v) {
    char buf[48];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, p);
}

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

inline constexpr std::array<const char*, 6> palette{"#1f77b4", "#ff7f0e", "#2ca02c",
                                                    "#d62728", "#9467bd", "#8c564b"};

struct frame {
    double ml = 52, mr = 16, mt = 34, mb = 42;
    double w, h;

    explicit frame(const chart_spec& s)
        : w(static_cast<double>(s.width)), h(static_cast<double>(s.height)) {}

    double plot_w() const { return w - ml - mr; }
    double plot_h() const { return h - mt - mb; }
    double x0() const { return ml; }
    double y0() const { return mt; }
};

inline void open_doc(std::string& out, const chart_spec& s) {
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(s.width) + "\" height=\"" + std::to_string(s.height) +
           "\" viewBox=\"0 0 " + std::to_string(s.width) + " " + std::to_string(s.height) +
           "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(s.width) + "\" height=\"" +
           std::to_string(s.height) + "\" fill=\"#ffffff\"/>\n";
}

inline void title_and_axes(std::string& out, const chart_spec& s, const frame& f) {
    if (!s.title.empty())
        out += "<text x=\"" + num(f.w / 2) +
               "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
               escape(s.title) + "</text>\n";
    // axis lines
    out += "<line x1=\"" + num(f.x0()) + "\" y1=\"" + num(f.y0() + f.plot_h()) + "\" x2=\"" +
           num(f.x0() + f.plot_w()) + "\" y2=\"" + num(f.y0() + f.plot_h()) +
           "\" stroke=\"#333333\"/>\n";
    out += "<line x1=\"" + num(f.x0()) + "\" y1=\"" + num(f.y0()) + "\" x2=\"" + num(f.x0()) +
           "\" y2=\"" + num(f.y0() + f.plot_h()) + "\" stroke=\"#333333\"/>\n";
    if (!s.x_label.empty())
        out += "<text x=\"" + num(f.x0() + f.plot_w() / 2) + "\" y=\"" + num(f.h - 8) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
               escape(s.x_label) + "</text>\n";
    if (!s.y_label.empty())
        out += "<text x=\"14\" y=\"" + num(f.y0() + f.plot_h() / 2) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "transform=\"rotate(-90 14 " +
               num(f.y0() + f.plot_h() / 2) + ")\">" + escape(s.y_label) + "</text>\n";
}

inline void range_labels(std::string& out, const frame& f, double xmin, double xmax, double ymin,
                         double ymax) {
    const double base = f.y0() + f.plot_h();
    out += "<text x=\"" + num(f.x0()) + "\" y=\"" + num(base + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + num(xmin) +
           "</text>\n";
    out += "<text x=\"" + num(f.x0() + f.plot_w()) + "\" y=\"" + num(base + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + num(xmax) +
           "</text>\n";
    out += "<text x=\"" + num(f.x0() - 4) + "\" y=\"" + num(base) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(ymin) +
           "</text>\n";
    out += "<text x=\"" + num(f.x0() - 4) + "\" y=\"" + num(f.y0() + 10) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(ymax) +
           "</text>\n";
}

inline std::vector<double> histogram_counts(std::span<const double> sample, double lo, double hi,
                                            size_t bins) {
    std::vector<double> counts(bins, 0.0);
    const double width = hi - lo;
    for (double x : sample) {
        size_t idx = 0;
        if (width > 0)
            idx = std::min(static_cast<size_t>((x - lo) / width * static_cast<double>(bins)),
                           bins - 1);
        counts[idx] += 1.0;
    }
    return counts;
}

inline void bars(std::string& out, const frame& f, const std::vector<double>& counts,
                 double peak, const char* color, double opacity) {
    const double bw = f.plot_w() / static_cast<double>(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0.0) continue;
        const double hgt = f.plot_h() * counts[i] / peak;
        out += "<rect x=\"" + num(f.x0() + bw * static_cast<double>(i)) + "\" y=\"" +
               num(f.y0() + f.plot_h() - hgt) + "\" width=\"" + num(bw) + "\" height=\"" +
               num(hgt) + "\" fill=\"" + color + "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
    }
}

inline std::array<int, 3> parse_hex(const std::string& c) {
    if (c.size() != 7 || c[0] != '#') fail(errc::invalid_spec, "color must be #rrggbb");
    auto hex = [&](size_t at) {
        int v = 0;
        std::from_chars(c.data() + at, c.data() + at + 2, v, 16);
        return v;
    };
    return {hex(1), hex(3), hex(5)};
}

inline std::string lerp_color(const std::array<int, 3>& a, const std::array<int, 3>& b,
                              double t) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(a[0] + t * (b[0] - a[0]))),
                  static_cast<int>(std::lround(a[1] + t * (b[1] - a[1]))),
                  static_cast<int>(std::lround(a[2] + t * (b[2] - a[2]))));
    return buf;
}

}  // namespace svg

inline std::string render_histogram(std::span<const double> sample, const chart_spec& spec) {
    spec.validate();
    if (sample.empty()) fail(errc::empty_sample, "histogram of an empty sample");
    double lo = sample[0], hi = sample[0];
    for (double x : sample) lo = std::min(lo, x), hi = std::max(hi, x);

    const auto counts = svg::histogram_counts(sample, lo, hi, spec.bins);
    const double peak = *std::max_element(counts.begin(), counts.end());

    std::string out;
    svg::frame f(spec);
    svg::open_doc(out, spec);
    svg::bars(out, f, counts, peak, svg::palette[0], 0.85);
    svg::title_and_axes(out, spec, f);
    svg::range_labels(out, f, lo, hi, 0.0, peak);
    out += "</svg>\n";
    return out;
}

/// Two semi-transparent histograms over shared bins with a legend.
inline std::string render_compare(std::span<const double> real, std::span<const double> synth,
                                  const chart_spec& spec) {
    spec.validate();
    if (real.empty() || synth.empty()) fail(errc::empty_sample, "compare needs both samples");
    double lo = real[0], hi = real[0];
    for (double x : real) lo = std::min(lo, x), hi = std::max(hi, x);
    for (double x : synth) lo = std::min(lo, x), hi = std::max(hi, x);

    const auto c_real = svg::histogram_counts(real, lo, hi, spec.bins);
    const auto c_synth = svg::histogram_counts(synth, lo, hi, spec.bins);
    const double peak = std::max(*std::max_element(c_real.begin(), c_real.end()),
                                 *std::max_element(c_synth.begin(), c_synth.end()));

    std::string out;
    svg::frame f(spec);
    svg::open_doc(out, spec);
    svg::bars(out, f, c_real, peak, svg::palette[0], 0.5);
    svg::bars(out, f, c_synth, peak, svg::palette[1], 0.5);
    svg::title_and_axes(out, spec, f);
    svg::range_labels(out, f, lo, hi, 0.0, peak);

    const double lx = f.x0() + f.plot_w() - 90, ly = f.y0() + 6;
    const char* names[] = {"real", "synthetic"};
    for (int i = 0; i < 2; ++i) {
        out += "<rect x=\"" + svg::num(lx) + "\" y=\"" + svg::num(ly + 16 * i) +
               "\" width=\"12\" height=\"12\" fill=\"" + svg::palette[size_t(i)] +
               "\" fill-opacity=\"0.5\"/>\n";
        out += "<text x=\"" + svg::num(lx + 16) + "\" y=\"" + svg::num(ly + 16 * i + 10) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + names[i] + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

/// One polyline per y column against a sorted date axis; a single-point
/// series degenerates to a circle marker.
inline std::string render_timeseries(const table& t, const std::string& x_col,
                                     const std::vector<std::string>& y_cols,
                                     const chart_spec& spec) {
    spec.validate();
    if (t.n_rows() == 0) fail(errc::empty_sample, "timeseries needs rows");
    if (y_cols.empty()) fail(errc::invalid_spec, "timeseries needs y columns");
    const auto& days = t.dates(x_col);
    std::vector<double> x;
    x.reserve(days.size());
    for (const date& d : days) x.push_back(static_cast<double>(to_epoch_days(d)));
    for (size_t i = 1; i < x.size(); ++i)
        if (x[i] < x[i - 1]) fail(errc::unsorted_x, "x column must be sorted ascending");

    double ymin = t.floats(y_cols[0])[0], ymax = ymin;
    for (const auto& name : y_cols)
        for (double v : t.floats(name)) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
    double xmin = x.front(), xmax = x.back();

    // 5% padding; degenerate spans widen by one unit so points sit mid-plot
    auto pad = [](double& lo, double& hi) {
        const double span = hi - lo;
        if (span == 0) {
            lo -= 1;
            hi += 1;
        } else {
            lo -= 0.05 * span;
            hi += 0.05 * span;
        }
    };
    pad(xmin, xmax);
    pad(ymin, ymax);

    svg::frame f(spec);
    auto sx = [&](double v) { return f.x0() + (v - xmin) / (xmax - xmin) * f.plot_w(); };
    auto sy = [&](double v) {
        return f.y0() + f.plot_h() - (v - ymin) / (ymax - ymin) * f.plot_h();
    };

    std::string out;
    svg::open_doc(out, spec);
    for (size_t s = 0; s < y_cols.size(); ++s) {
        const auto& y = t.floats(y_cols[s]);
        const char* color = svg::palette[s % svg::palette.size()];
        if (y.size() == 1) {
            out += "<circle cx=\"" + svg::num(sx(x[0])) + "\" cy=\"" + svg::num(sy(y[0])) +
                   "\" r=\"3\" fill=\"" + color + "\"/>\n";
        } else {
            out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                   "\" stroke-width=\"1.5\" points=\"";
            for (size_t i = 0; i < y.size(); ++i) {
                if (i) out += ' ';
                out += svg::num(sx(x[i])) + "," + svg::num(sy(y[i]));
            }
            out += "\"/>\n";
        }
        out += "<rect x=\"" + svg::num(f.x0() + f.plot_w() - 90) + "\" y=\"" +
               svg::num(f.y0() + 6 + 16 * static_cast<double>(s)) +
               "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
        out += "<text x=\"" + svg::num(f.x0() + f.plot_w() - 74) + "\" y=\"" +
               svg::num(f.y0() + 16 + 16 * static_cast<double>(s)) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + svg::escape(y_cols[s]) +
               "</text>\n";
    }
    svg::title_and_axes(out, spec, f);
    svg::range_labels(out, f, xmin, xmax, ymin, ymax);
    out += "</svg>\n";
    return out;
}

/// One rect per (x, y) cell, colored by linear interpolation between the two
/// ramp stops over [min(value), max(value)].
inline std::string render_heatmap(const table& grid, const chart_spec& spec) {
    spec.validate();
    if (grid.n_rows() == 0) fail(errc::empty_sample, "heatmap needs cells");
    const auto xs = grid.numeric("x");
    const auto ys = grid.numeric("y");
    const auto& vals = grid.floats("value");

    std::set<std::pair<double, double>> seen;
    for (size_t i = 0; i < xs.size(); ++i)
        if (!seen.insert({xs[i], ys[i]}).second)
            fail(errc::duplicate_cell, "duplicate heatmap cell");

    const double xmin = *std::min_element(xs.begin(), xs.end());
    const double xmax = *std::max_element(xs.begin(), xs.end());
    const double ymin = *std::min_element(ys.begin(), ys.end());
    const double ymax = *std::max_element(ys.begin(), ys.end());
    const double vmin = *std::min_element(vals.begin(), vals.end());
    const double vmax = *std::max_element(vals.begin(), vals.end());

    const auto stop_a = svg::parse_hex(spec.ramp[0]);
    const auto stop_b = svg::parse_hex(spec.ramp[1]);

    svg::frame f(spec);
    const double nx = xmax - xmin + 1, ny = ymax - ymin + 1;
    const double cw = f.plot_w() / nx, ch = f.plot_h() / ny;

    std::string out;
    svg::open_doc(out, spec);
    for (size_t i = 0; i < xs.size(); ++i) {
        const double tt = vmax > vmin ? (vals[i] - vmin) / (vmax - vmin) : 0.0;
        out += "<rect x=\"" + svg::num(f.x0() + (xs[i] - xmin) * cw) + "\" y=\"" +
               svg::num(f.y0() + (ys[i] - ymin) * ch) + "\" width=\"" + svg::num(cw) +
               "\" height=\"" + svg::num(ch) + "\" fill=\"" +
               svg::lerp_color(stop_a, stop_b, tt) + "\"/>\n";
    }
    svg::title_and_axes(out, spec, f);
    out += "</svg>\n";
    return out;
}

}  // namespace sagda
