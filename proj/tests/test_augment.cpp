#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sagda/augment.hpp"
#include "test_util.hpp"

using namespace sagda;
using sagda_test::tables_equal;

namespace {

table two_points() {
    table t;
    t.add_column(float_column("x", {0.0, 2.0}));
    t.add_column(float_column("y", {0.0, 2.0}));
    return t;
}

/// Brute-force oracle: smallest distance from p to any segment between two
/// original rows, over all pairs. Independent of the SMOTE implementation.
double min_segment_distance(const std::vector<std::vector<double>>& originals,
                            const std::vector<double>& p) {
    double best = 1e300;
    const size_t n = originals.size();
    const size_t d = p.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            // project p onto segment a-b, clamped to [0,1]
            double dot = 0, len2 = 0;
            for (size_t f = 0; f < d; ++f) {
                const double ab = originals[j][f] - originals[i][f];
                dot += (p[f] - originals[i][f]) * ab;
                len2 += ab * ab;
            }
            const double s = len2 == 0 ? 0.0 : std::clamp(dot / len2, 0.0, 1.0);
            double dist2 = 0;
            for (size_t f = 0; f < d; ++f) {
                const double closest = originals[i][f] + s * (originals[j][f] - originals[i][f]);
                dist2 += (p[f] - closest) * (p[f] - closest);
            }
            best = std::min(best, std::sqrt(dist2));
        }
    }
    return best;
}

}  // namespace

TEST_CASE("smote on two points interpolates along the segment") {
    table t = two_points();
    rng r(42);
    table out = smote_augment(t, {"x", "y"}, 1, 1, r);
    REQUIRE(out.n_rows() == 3);
    const double cx = out.floats("x")[2];
    const double cy = out.floats("y")[2];
    REQUIRE(cx >= 0.0);
    REQUIRE(cx <= 2.0);
    REQUIRE(cx == Catch::Approx(cy).margin(1e-12));  // stays on y=x
    REQUIRE(out.ints("synthetic") == std::vector<int64_t>{0, 0, 1});
}

TEST_CASE("smote with n_new=0 only adds the provenance column") {
    table t = two_points();
    rng r(1);
    table out = smote_augment(t, {"x"}, 1, 0, r);
    REQUIRE(out.n_rows() == 2);
    REQUIRE(out.n_cols() == 3);
    REQUIRE(out.ints("synthetic") == std::vector<int64_t>{0, 0});
}

TEST_CASE("smote preserves affine constraints on collinear data") {
    table t;
    t.add_column(float_column("x", {0.0, 1.0, 2.0}));
    t.add_column(float_column("y", {0.0, 1.0, 2.0}));
    rng r(42);
    table out = smote_augment(t, {"x", "y"}, 2, 50, r);
    for (size_t i = 3; i < out.n_rows(); ++i)
        REQUIRE(std::abs(out.floats("y")[i] - out.floats("x")[i]) < 1e-9);
}

TEST_CASE("smote closure: synthetic points lie on original-pair segments") {
    rng gen(7);
    table t;
    std::vector<double> a, b, c;
    for (int i = 0; i < 30; ++i) {
        a.push_back(gen.normal(0, 3));
        b.push_back(gen.normal(10, 5));
        c.push_back(gen.uniform(-2, 2));
    }
    t.add_column(float_column("a", std::move(a)));
    t.add_column(float_column("b", std::move(b)));
    t.add_column(float_column("c", std::move(c)));

    std::vector<std::vector<double>> originals;
    for (size_t i = 0; i < t.n_rows(); ++i)
        originals.push_back({t.floats("a")[i], t.floats("b")[i], t.floats("c")[i]});

    rng r(42);
    table out = smote_augment(t, {"a", "b", "c"}, 5, 40, r);
    for (size_t i = t.n_rows(); i < out.n_rows(); ++i) {
        const std::vector<double> p{out.floats("a")[i], out.floats("b")[i], out.floats("c")[i]};
        REQUIRE(min_segment_distance(originals, p) <= 1e-9);
    }
}

TEST_CASE("smote copies category, date and int columns from the seed row") {
    table t;
    t.add_column(float_column("x", {0.0, 10.0, 20.0}));
    t.add_column(int_column("id", {100, 200, 300}));
    t.add_column(category_column("season", {"A", "B", "C"}));
    t.add_column(date_column("day", {date{2020, 1, 1}, date{2020, 2, 1}, date{2020, 3, 1}}));
    rng r(9);
    table out = smote_augment(t, {"x"}, 2, 25, r);
    for (size_t i = 3; i < out.n_rows(); ++i) {
        const int64_t id = out.ints("id")[i];
        const size_t seed = static_cast<size_t>(id / 100 - 1);
        REQUIRE(out.cats("season")[i] == t.cats("season")[seed]);
        REQUIRE(out.dates("day")[i] == t.dates("day")[seed]);
    }
}

TEST_CASE("smote error paths") {
    rng r(1);
    table one;
    one.add_column(float_column("x", {1.0}));
    REQUIRE_THROWS_AS(smote_augment(one, {"x"}, 1, 1, r), error);  // TooFewRows

    table t = two_points();
    REQUIRE_THROWS_AS(smote_augment(t, {"x"}, 2, 1, r), error);  // KTooLarge

    table cat;
    cat.add_column(category_column("s", {"a", "b"}));
    cat.add_column(float_column("x", {1.0, 2.0}));
    REQUIRE_THROWS_AS(smote_augment(cat, {"s"}, 1, 1, r), error);  // NonNumericFeature
}

TEST_CASE("originals are untouched and row arithmetic is exact") {
    rng gen(3);
    table t;
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(gen.uniform(0, 100));
        y.push_back(gen.uniform(0, 50));
    }
    t.add_column(float_column("x", std::move(x)));
    t.add_column(float_column("y", std::move(y)));

    rng r(5);
    table out = smote_augment(t, {"x", "y"}, 3, 17, r);
    REQUIRE(out.n_rows() == t.n_rows() + 17);

    std::vector<size_t> head(t.n_rows());
    std::iota(head.begin(), head.end(), size_t{0});
    table originals = out.take(head);
    for (size_t c = 0; c < t.n_cols(); ++c) {
        REQUIRE(originals.columns()[c].name == t.columns()[c].name);
        REQUIRE(originals.columns()[c].data == t.columns()[c].data);
    }

    // determinism under a fixed seed
    rng r2(5);
    REQUIRE(tables_equal(out, smote_augment(t, {"x", "y"}, 3, 17, r2)));
}

TEST_CASE("stratified growth_pct arithmetic reproduces the 145.2% case") {
    rng gen(11);
    table t;
    std::vector<double> x, yield;
    for (int i = 0; i < 1000; ++i) {
        x.push_back(gen.uniform(0, 10));
        yield.push_back(gen.uniform(50, 150));
    }
    t.add_column(float_column("x", std::move(x)));
    t.add_column(float_column("yield", std::move(yield)));

    augment_plan plan;
    plan.method = augment_plan::method_kind::smote;
    plan.feature_cols = {"x", "yield"};
    plan.growth_pct = 145.2;
    rng r(42);
    table out = stratified_oversample(t, plan, r);
    REQUIRE(out.n_rows() == 2452);
}

TEST_CASE("empty stratum is an error") {
    table t;
    t.add_column(float_column("x", {1.0, 2.0}));
    t.add_column(category_column("season", {"2019", "2020"}));
    augment_plan plan;
    plan.feature_cols = {"x"};
    plan.stratum = {{"season", cmp_op::eq, std::string("2018")}};
    plan.n_new = 5;
    rng r(1);
    REQUIRE_THROWS_AS(stratified_oversample(t, plan, r), error);
}

TEST_CASE("quartile stratum interpolation never leaves the stratum hull") {
    rng gen(13);
    table t;
    std::vector<double> x, yield;
    for (int i = 0; i < 40; ++i) {
        x.push_back(gen.uniform(0, 10));
        yield.push_back(gen.uniform(0, 100));
    }
    t.add_column(float_column("x", std::move(x)));
    t.add_column(float_column("yield", std::move(yield)));

    const double q1 = quantile(t.floats("yield"), 0.25);
    double stratum_max = -1e300, stratum_min = 1e300;
    for (double v : t.floats("yield"))
        if (v <= q1) {
            stratum_max = std::max(stratum_max, v);
            stratum_min = std::min(stratum_min, v);
        }

    augment_plan plan;
    plan.feature_cols = {"x", "yield"};
    plan.stratum = {{"yield", cmp_op::le, quantile_ref{0.25}}};
    plan.n_new = 60;
    rng r(42);
    table out = stratified_oversample(t, plan, r);
    REQUIRE(out.n_rows() == 100);
    for (size_t i = 40; i < out.n_rows(); ++i) {
        REQUIRE(out.floats("yield")[i] <= stratum_max + 1e-12);
        REQUIRE(out.floats("yield")[i] >= stratum_min - 1e-12);
        REQUIRE(out.ints("synthetic")[i] == 1);
    }
}

TEST_CASE("jitter with zero sigma copies rows exactly") {
    table t = two_points();
    rng r(4);
    table out = jitter_augment(t, {{"x", 0.0}, {"y", 0.0}}, 10, r);
    REQUIRE(out.n_rows() == 12);
    for (size_t i = 2; i < 12; ++i) {
        const double x = out.floats("x")[i];
        REQUIRE((x == 0.0 || x == 2.0));
        REQUIRE(out.floats("y")[i] == x);
    }
}

TEST_CASE("jitter noise has the requested spread at fixed seed") {
    table t;
    t.add_column(float_column("yield", std::vector<double>(50, 100.0)));
    rng r(42);
    table out = jitter_augment(t, {{"yield", 5.0}}, 1000, r);
    std::vector<double> fresh(out.floats("yield").begin() + 50, out.floats("yield").end());
    REQUIRE(mean(fresh) == Catch::Approx(100.0).margin(0.5));
    REQUIRE(sample_stddev(fresh) == Catch::Approx(5.0).margin(0.5));
}

TEST_CASE("jitter rejects non-float sigma targets") {
    table t;
    t.add_column(category_column("s", {"a"}));
    rng r(1);
    REQUIRE_THROWS_AS(jitter_augment(t, {{"s", 1.0}}, 1, r), error);
}

TEST_CASE("extrapolate continues a perfect line with zero residual spread") {
    table t;
    t.add_column(float_column("i", {1, 2, 3, 4, 5}));
    t.add_column(float_column("y", {2, 4, 6, 8, 10}));
    rng r(42);
    table out = extrapolate_augment(t, "i", 2, r);
    REQUIRE(out.n_rows() == 7);
    REQUIRE(out.floats("i")[5] == Catch::Approx(6.0).margin(1e-9));
    REQUIRE(out.floats("y")[5] == Catch::Approx(12.0).margin(1e-9));
    REQUIRE(out.floats("i")[6] == Catch::Approx(7.0).margin(1e-9));
    REQUIRE(out.floats("y")[6] == Catch::Approx(14.0).margin(1e-9));
}

TEST_CASE("extrapolating a constant column stays constant") {
    table t;
    t.add_column(int_column("i", {1, 2, 3}));
    t.add_column(float_column("c", {7.5, 7.5, 7.5}));
    rng r(9);
    table out = extrapolate_augment(t, "i", 3, r);
    for (size_t i = 3; i < 6; ++i) REQUIRE(out.floats("c")[i] == Catch::Approx(7.5).margin(1e-9));
    REQUIRE(out.ints("i")[5] == 6);
}

TEST_CASE("extrapolate slope matches the closed-form OLS oracle") {
    rng gen(21);
    std::vector<double> xs, ys;
    for (int i = 1; i <= 30; ++i) {
        xs.push_back(i);
        ys.push_back(3.0 * i + gen.normal(0.0, 1.0));
    }
    // normal-equations oracle computed right here, independent of the library
    const double xm = mean(xs), ym = mean(ys);
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - xm) * (ys[i] - ym);
        sxx += (xs[i] - xm) * (xs[i] - xm);
    }
    const double oracle_slope = sxy / sxx;
    REQUIRE(oracle_slope == Catch::Approx(3.0).margin(0.2));

    table t;
    t.add_column(float_column("i", std::move(xs)));
    t.add_column(float_column("y", std::move(ys)));
    rng r(42);
    table out = extrapolate_augment(t, "i", 10, r);
    // recover the implied slope from two extrapolated points minus residual noise:
    // fitted values differ by slope * step, and bootstrap residuals are bounded,
    // so check the mean gap over the horizon instead of one pair
    std::vector<double> gaps;
    for (size_t i = 31; i < out.n_rows(); ++i)
        gaps.push_back(out.floats("y")[i] - out.floats("y")[i - 1]);
    REQUIRE(mean(gaps) == Catch::Approx(oracle_slope).margin(1.0));
}

TEST_CASE("extrapolate needs three distinct index values") {
    table t;
    t.add_column(float_column("i", {1, 1, 2}));
    t.add_column(float_column("y", {1, 1, 2}));
    rng r(1);
    REQUIRE_THROWS_AS(extrapolate_augment(t, "i", 1, r), error);
}

TEST_CASE("extrapolate along a date index steps by the median gap in days") {
    table t;
    t.add_column(date_column(
        "day", {date{2020, 1, 1}, date{2020, 1, 8}, date{2020, 1, 15}, date{2020, 1, 22}}));
    t.add_column(float_column("y", {1, 2, 3, 4}));
    rng r(2);
    table out = extrapolate_augment(t, "day", 2, r);
    REQUIRE(out.dates("day")[4] == date{2020, 1, 29});
    REQUIRE(out.dates("day")[5] == date{2020, 2, 5});
}
