#include <catch2/catch_amalgamated.hpp>

#include <regex>

#include "sagda/generate.hpp"
#include "sagda/visualize.hpp"

using namespace sagda;

namespace {

// Minimal well-formedness check: tags balance and the root is <svg>.
bool is_well_formed_svg(const std::string& doc) {
    if (doc.find("<svg") == std::string::npos) return false;
    std::vector<std::string> stack;
    std::regex tag(R"(<(/?)([A-Za-z][A-Za-z0-9]*)([^>]*)>)");
    for (auto it = std::sregex_iterator(doc.begin(), doc.end(), tag);
         it != std::sregex_iterator(); ++it) {
        const bool closing = (*it)[1].length() > 0;
        const std::string name = (*it)[2];
        const std::string rest = (*it)[3];
        if (closing) {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!rest.ends_with("/") && name != "?xml") {
            stack.push_back(name);
        }
    }
    return stack.empty();
}

// Every x/y/cx/cy/x1/y1/x2/y2 attribute and polyline point must sit inside
// the declared viewBox.
bool coords_within_viewbox(const std::string& doc, double w, double h) {
    std::regex attr(R"((?:\bx|\by|\bcx|\bcy|\bx1|\by1|\bx2|\by2)=\"(-?[0-9.]+)\")");
    for (auto it = std::sregex_iterator(doc.begin(), doc.end(), attr);
         it != std::sregex_iterator(); ++it) {
        const double v = std::stod((*it)[1]);
        if (v < 0.0 || v > std::max(w, h)) return false;
    }
    std::regex pts(R"(points=\"([^\"]*)\")");
    for (auto it = std::sregex_iterator(doc.begin(), doc.end(), pts);
         it != std::sregex_iterator(); ++it) {
        std::stringstream ss((*it)[1]);
        std::string pair;
        while (ss >> pair) {
            const auto comma = pair.find(',');
            const double x = std::stod(pair.substr(0, comma));
            const double y = std::stod(pair.substr(comma + 1));
            if (x < -1e-9 || x > w || y < -1e-9 || y > h) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("single-value histogram with one bin is a full-height bar") {
    chart_spec spec;
    spec.bins = 1;
    spec.title = "one";
    std::vector<double> v{5.0};
    const std::string doc = render_histogram(v, spec);
    REQUIRE(is_well_formed_svg(doc));
    // full height = plot height; bar must reach the top of the plot area
    std::regex bar(R"(<rect [^>]*height=\"([0-9.]+)\" fill=\"#1f77b4\")");
    std::smatch m;
    REQUIRE(std::regex_search(doc, m, bar));
    REQUIRE(std::stod(m[1]) > 300.0);  // 400 - margins
}

TEST_CASE("histogram output is byte-stable") {
    chart_spec spec;
    spec.title = "yields";
    rng g(42);
    std::vector<double> v;
    for (int i = 0; i < 500; ++i) v.push_back(g.normal(100, 20));
    REQUIRE(render_histogram(v, spec) == render_histogram(v, spec));
}

TEST_CASE("histogram rejects empty samples and zero bins") {
    chart_spec spec;
    REQUIRE_THROWS_AS(render_histogram(std::vector<double>{}, spec), error);
    spec.bins = 0;
    std::vector<double> v{1.0};
    REQUIRE_THROWS_AS(render_histogram(v, spec), error);
}

TEST_CASE("compare mode overlays identical samples with equal bar sets") {
    chart_spec spec;
    spec.bins = 8;
    rng g(7);
    std::vector<double> v;
    for (int i = 0; i < 200; ++i) v.push_back(g.uniform(0, 10));
    const std::string doc = render_compare(v, v, spec);
    REQUIRE(is_well_formed_svg(doc));

    // same geometry for both series: strip colors, the rect lists must match
    std::regex bar(R"(<rect (x=\"[0-9.]+\" y=\"[0-9.]+\" width=\"[0-9.]+\" height=\"[0-9.]+\") fill=\"(#1f77b4|#ff7f0e)\" fill-opacity=\"0.50\")");
    std::vector<std::string> real_bars, synth_bars;
    for (auto it = std::sregex_iterator(doc.begin(), doc.end(), bar);
         it != std::sregex_iterator(); ++it) {
        ((*it)[2] == "#1f77b4" ? real_bars : synth_bars).push_back((*it)[1]);
    }
    REQUIRE_FALSE(real_bars.empty());
    REQUIRE(real_bars == synth_bars);
    REQUIRE(doc.find(">real<") != std::string::npos);
    REQUIRE(doc.find(">synthetic<") != std::string::npos);
}

TEST_CASE("timeseries renders one polyline per column with ordered legend") {
    table t;
    t.add_column(date_column("date", {date{2020, 1, 1}, date{2020, 1, 2}, date{2020, 1, 3}}));
    t.add_column(float_column("tmin", {5, 6, 7}));
    t.add_column(float_column("tmax", {15, 16, 17}));
    chart_spec spec;
    const std::string doc = render_timeseries(t, "date", {"tmin", "tmax"}, spec);
    REQUIRE(is_well_formed_svg(doc));
    REQUIRE(std::count(doc.begin(), doc.end(), '\n') ==
            static_cast<long>(std::count(doc.begin(), doc.end(), '\n')));
    size_t lines = 0;
    for (std::string::size_type at = 0; (at = doc.find("<polyline", at)) != std::string::npos;
         ++at)
        ++lines;
    REQUIRE(lines == 2);
    REQUIRE(doc.find(">tmin<") < doc.find(">tmax<"));  // legend in column order
    REQUIRE(coords_within_viewbox(doc, 640, 400));
}

TEST_CASE("constant series sits mid-plot as a horizontal line") {
    table t;
    t.add_column(date_column("date", {date{2020, 1, 1}, date{2020, 1, 2}}));
    t.add_column(float_column("v", {3.0, 3.0}));
    chart_spec spec;
    const std::string doc = render_timeseries(t, "date", {"v"}, spec);
    std::regex pts(R"(points=\"([0-9.]+),([0-9.]+) ([0-9.]+),([0-9.]+)\")");
    std::smatch m;
    REQUIRE(std::regex_search(doc, m, pts));
    const double y1 = std::stod(m[2]), y2 = std::stod(m[4]);
    REQUIRE(y1 == y2);
    // mid-plot: mt + plot_h/2 = 34 + (400-34-42)/2 = 196
    REQUIRE(y1 == Catch::Approx(196.0).margin(0.5));
}

TEST_CASE("single-point series renders a circle, no polyline") {
    table t;
    t.add_column(date_column("date", {date{2020, 1, 1}}));
    t.add_column(float_column("v", {3.0}));
    chart_spec spec;
    const std::string doc = render_timeseries(t, "date", {"v"}, spec);
    REQUIRE(doc.find("<circle") != std::string::npos);
    REQUIRE(doc.find("<polyline") == std::string::npos);
}

TEST_CASE("unsorted x axis is rejected") {
    table t;
    t.add_column(date_column("date", {date{2020, 1, 2}, date{2020, 1, 1}}));
    t.add_column(float_column("v", {1.0, 2.0}));
    chart_spec spec;
    REQUIRE_THROWS_AS(render_timeseries(t, "date", {"v"}, spec), error);
}

TEST_CASE("uniform heatmap paints every cell in the low ramp stop") {
    table grid;
    grid.add_column(int_column("x", {0, 1, 0, 1}));
    grid.add_column(int_column("y", {0, 0, 1, 1}));
    grid.add_column(float_column("value", {4, 4, 4, 4}));
    chart_spec spec;
    const std::string doc = render_heatmap(grid, spec);
    REQUIRE(is_well_formed_svg(doc));
    size_t count = 0;
    for (std::string::size_type at = 0; (at = doc.find("fill=\"#f7fbff\"", at)) != std::string::npos;
         ++at)
        ++count;
    REQUIRE(count == 4);
}

TEST_CASE("heatmap endpoints hit the ramp stops exactly") {
    table grid;
    grid.add_column(int_column("x", {0, 1, 2}));
    grid.add_column(int_column("y", {0, 0, 0}));
    grid.add_column(float_column("value", {0.0, 5.0, 10.0}));
    chart_spec spec;
    const std::string doc = render_heatmap(grid, spec);
    REQUIRE(doc.find("fill=\"#f7fbff\"") != std::string::npos);   // min
    REQUIRE(doc.find("fill=\"#08306b\"") != std::string::npos);   // max
}

TEST_CASE("soil-grid gradient maps to a monotone color ramp") {
    soil_grid_params p;
    p.width = 6;
    p.height = 1;
    p.base = 1.0;
    p.gx = 1.0;
    rng r(1);
    table grid = gen_soil_grid(p, r);
    chart_spec spec;
    spec.ramp = {"#000000", "#ffffff"};  // grayscale: monotone value -> monotone hex
    const std::string doc = render_heatmap(grid, spec);
    std::regex cell(R"(fill=\"#([0-9a-f]{2})[0-9a-f]{4}\"/>)");
    std::vector<int> reds;
    for (auto it = std::sregex_iterator(doc.begin(), doc.end(), cell);
         it != std::sregex_iterator(); ++it)
        reds.push_back(std::stoi((*it)[1], nullptr, 16));
    REQUIRE(reds.size() == 7);
    reds.erase(reds.begin());  // the white canvas rect comes first
    for (size_t i = 1; i < reds.size(); ++i) REQUIRE(reds[i] > reds[i - 1]);
}

TEST_CASE("duplicate heatmap cells are rejected") {
    table grid;
    grid.add_column(int_column("x", {0, 0}));
    grid.add_column(int_column("y", {0, 0}));
    grid.add_column(float_column("value", {1, 2}));
    chart_spec spec;
    REQUIRE_THROWS_AS(render_heatmap(grid, spec), error);
}

TEST_CASE("xml-sensitive characters in labels are escaped") {
    chart_spec spec;
    spec.title = "a < b & c > d";
    std::vector<double> v{1.0, 2.0};
    const std::string doc = render_histogram(v, spec);
    REQUIRE(doc.find("a &lt; b &amp; c &gt; d") != std::string::npos);
    REQUIRE(is_well_formed_svg(doc));
}
