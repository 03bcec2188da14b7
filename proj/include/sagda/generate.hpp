#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sagda/date.hpp"
#include "sagda/dist.hpp"
#include "sagda/error.hpp"
#include "sagda/rng.hpp"
#include "sagda/table.hpp"

namespace sagda {

// ---------------------------------------------------------------------------
// Per-column draws
// ---------------------------------------------------------------------------

struct dist_spec {
    enum class family { normal, lognormal, uniform, beta };
    family fam = family::normal;
    // normal: (mu, sigma); lognormal: (mu_log, sigma_log); uniform: (a, b);
    // beta: (alpha, beta) rescaled onto [scale_lo, scale_hi]
    double p1 = 0.0;
    double p2 = 1.0;
    double scale_lo = 0.0;
    double scale_hi = 1.0;
    std::optional<std::pair<double, double>> clamp;

    void validate() const {
        switch (fam) {
            case family::normal:
                if (p2 <= 0.0) fail(errc::invalid_spec, "normal needs sigma > 0");
                break;
            case family::lognormal:
                if (p2 <= 0.0) fail(errc::invalid_spec, "lognormal needs sigma_log > 0");
                break;
            case family::uniform:
                if (p1 >= p2) fail(errc::invalid_spec, "uniform needs a < b");
                break;
            case family::beta:
                if (p1 <= 0.0 || p2 <= 0.0) fail(errc::invalid_spec, "beta needs alpha, beta > 0");
                if (scale_lo >= scale_hi) fail(errc::invalid_spec, "beta scale needs lo < hi");
                break;
        }
        if (clamp && clamp->first >= clamp->second)
            fail(errc::invalid_spec, "clamp needs lo < hi");
    }
};

inline double draw(const dist_spec& spec, rng& r) {
    double x = 0.0;
    switch (spec.fam) {
        case dist_spec::family::normal: x = r.normal(spec.p1, spec.p2); break;
        case dist_spec::family::lognormal: x = draw_lognormal(spec.p1, spec.p2, r); break;
        case dist_spec::family::uniform: x = r.uniform(spec.p1, spec.p2); break;
        case dist_spec::family::beta:
            x = spec.scale_lo + (spec.scale_hi - spec.scale_lo) * draw_beta(spec.p1, spec.p2, r);
            break;
    }
    if (spec.clamp) x = std::clamp(x, spec.clamp->first, spec.clamp->second);
    return x;
}

/// n i.i.d. draws from the spec; the clamp, when present, is applied last.
inline std::vector<double> gen_column(const dist_spec& spec, size_t n, rng& r) {
    spec.validate();
    std::vector<double> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(draw(spec, r));
    return out;
}

// ---------------------------------------------------------------------------
// Daily weather: Richardson-type generator. Rain occurrence is a two-state
// Markov chain, wet-day amounts are gamma, and the temperature mean follows
// a sinusoidal annual cycle. tmin/tmax come from the daily mean plus/minus
// half the diurnal range plus independent noise, reordered so tmin <= tmax.
// ---------------------------------------------------------------------------

struct weather_params {
    double t_mean = 18.0;        // deg C
    double t_amp = 8.0;          // deg C, >= 0
    double t_phase = 105.0;      // day-of-year of the sine zero crossing
    double t_sigma = 2.0;        // deg C, >= 0
    double diurnal_range = 10.0; // deg C, > 0
    double p_wet_given_wet = 0.6;
    double p_wet_given_dry = 0.2;
    double rain_shape = 0.8;     // > 0
    double rain_scale = 8.0;     // mm, > 0

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (t_amp < 0 || t_sigma < 0) fail(errc::invalid_spec, "t_amp, t_sigma must be >= 0");
        if (diurnal_range <= 0) fail(errc::invalid_spec, "diurnal_range must be > 0");
        if (!prob(p_wet_given_wet) || !prob(p_wet_given_dry))
            fail(errc::invalid_spec, "wet/dry probabilities must lie in [0,1]");
        if (rain_shape <= 0 || rain_scale <= 0)
            fail(errc::invalid_spec, "rain_shape, rain_scale must be > 0");
    }
};

/// Day-of-year, 1-based.
inline int day_of_year(const date& d) {
    return static_cast<int>(days_between(date{d.year, 1, 1}, d)) + 1;
}

/// Columns: date, tmin, tmax, rain_mm. `initial_wet` seeds the Markov chain
/// state of the day before the series; the default is a dry prior day.
inline table gen_weather(const weather_params& params, const date& start, size_t n_days, rng& r,
                         std::optional<bool> initial_wet = std::nullopt) {
    params.validate();
    if (n_days < 1) fail(errc::invalid_spec, "n_days must be >= 1");
    if (!valid_date(start)) fail(errc::invalid_spec, "invalid start date");

    rng temp_rng = r.split("temp");
    rng occ_rng = r.split("occurrence");
    rng amount_rng = r.split("amount");

    std::vector<date> days;
    std::vector<double> tmin, tmax, rain;
    days.reserve(n_days);
    tmin.reserve(n_days);
    tmax.reserve(n_days);
    rain.reserve(n_days);

    constexpr double two_pi = 2.0 * 3.141592653589793238;
    bool wet = initial_wet.value_or(false);
    for (size_t i = 0; i < n_days; ++i) {
        const date d = add_days(start, static_cast<int64_t>(i));
        const double doy = static_cast<double>(day_of_year(d));
        const double seasonal =
            params.t_mean + params.t_amp * std::sin(two_pi * (doy - params.t_phase) / 365.0);
        const double mean_t = seasonal + temp_rng.normal(0.0, params.t_sigma);
        double lo = mean_t - params.diurnal_range / 2.0 + temp_rng.normal(0.0, params.t_sigma);
        double hi = mean_t + params.diurnal_range / 2.0 + temp_rng.normal(0.0, params.t_sigma);
        if (lo > hi) std::swap(lo, hi);

        const double p_wet = wet ? params.p_wet_given_wet : params.p_wet_given_dry;
        wet = occ_rng.uniform() < p_wet;
        const double mm = wet ? draw_gamma(params.rain_shape, params.rain_scale, amount_rng) : 0.0;

        days.push_back(d);
        tmin.push_back(lo);
        tmax.push_back(hi);
        rain.push_back(mm);
    }

    table t;
    t.add_column(date_column("date", std::move(days)));
    t.add_column(float_column("tmin", std::move(tmin), "degC"));
    t.add_column(float_column("tmax", std::move(tmax), "degC"));
    t.add_column(float_column("rain_mm", std::move(rain), "mm"));
    return t;
}

// ---------------------------------------------------------------------------
// Spatial soil grid: deterministic fertility gradient plus i.i.d. noise.
// ---------------------------------------------------------------------------

struct soil_grid_params {
    size_t width = 1;
    size_t height = 1;
    double base = 0.0;
    double gx = 0.0;  // per cell along x
    double gy = 0.0;  // per cell along y
    double noise_sigma = 0.0;
    double clamp_lo = -std::numeric_limits<double>::infinity();
    double clamp_hi = std::numeric_limits<double>::infinity();

    void validate() const {
        if (width < 1 || height < 1) fail(errc::invalid_spec, "grid needs width, height >= 1");
        if (noise_sigma < 0) fail(errc::invalid_spec, "noise_sigma must be >= 0");
        if (clamp_lo >= clamp_hi) fail(errc::invalid_spec, "clamp needs lo < hi");
    }
};

/// Columns: x, y, value; one row per cell, row-major (y outer, x inner).
inline table gen_soil_grid(const soil_grid_params& params, rng& r) {
    params.validate();
    rng noise = r.split("noise");
    std::vector<int64_t> xs, ys;
    std::vector<double> vals;
    const size_t n = params.width * params.height;
    xs.reserve(n);
    ys.reserve(n);
    vals.reserve(n);
    for (size_t y = 0; y < params.height; ++y) {
        for (size_t x = 0; x < params.width; ++x) {
            const double eps = params.noise_sigma > 0 ? noise.normal(0.0, params.noise_sigma) : 0.0;
            const double v = params.base + params.gx * static_cast<double>(x) +
                             params.gy * static_cast<double>(y) + eps;
            xs.push_back(static_cast<int64_t>(x));
            ys.push_back(static_cast<int64_t>(y));
            vals.push_back(std::clamp(v, params.clamp_lo, params.clamp_hi));
        }
    }
    table t;
    t.add_column(int_column("x", std::move(xs)));
    t.add_column(int_column("y", std::move(ys)));
    t.add_column(float_column("value", std::move(vals)));
    return t;
}

// ---------------------------------------------------------------------------
// Joint soil / NPK / yield field trials with a quadratic-concave response.
// The closed-form interior optimum (rate_i* = beta_i / 2 gamma_i) is what the
// optimizer tests verify against.
// ---------------------------------------------------------------------------

inline constexpr std::array<const char*, 5> soil_property_names{
    "ph", "organic_matter_pct", "n_mgkg", "p_mgkg", "k_mgkg"};

struct yield_response {
    double beta0 = 0.0;
    std::array<double, 3> beta{0.0, 0.0, 0.0};    // applied n, p, k linear
    std::array<double, 3> gamma{0.0, 0.0, 0.0};   // applied n, p, k quadratic
    std::array<double, 5> soil_coef{0, 0, 0, 0, 0};
    double noise_sigma = 0.0;

    double evaluate(const std::array<double, 5>& soil, double n, double p, double k) const {
        const std::array<double, 3> rates{n, p, k};
        double y = beta0;
        for (size_t i = 0; i < 3; ++i) y += beta[i] * rates[i] - gamma[i] * rates[i] * rates[i];
        for (size_t i = 0; i < 5; ++i) y += soil_coef[i] * soil[i];
        return y;
    }
};

struct trial_gen_params {
    size_t n = 0;
    std::array<double, 5> soil_means{6.5, 2.0, 40.0, 15.0, 150.0};
    std::array<double, 25> soil_cov{};  // row-major 5x5, symmetric PD
    std::array<std::pair<double, double>, 3> rate_ranges{
        std::pair{0.0, 200.0}, std::pair{0.0, 120.0}, std::pair{0.0, 150.0}};
    yield_response response;
    std::vector<std::pair<std::string, double>> seasons{{"A", 1.0}};

    void validate() const {
        for (size_t i = 0; i < 5; ++i)
            for (size_t j = i + 1; j < 5; ++j)
                if (std::abs(soil_cov[i * 5 + j] - soil_cov[j * 5 + i]) > 1e-9)
                    fail(errc::invalid_spec, "soil covariance must be symmetric");
        for (const auto& [lo, hi] : rate_ranges)
            if (lo > hi) fail(errc::invalid_spec, "rate range needs lo <= hi");
        for (double g : response.gamma)
            if (g < 0) fail(errc::invalid_spec, "quadratic response terms must be >= 0");
        if (response.noise_sigma < 0) fail(errc::invalid_spec, "noise sigma must be >= 0");
        if (seasons.empty()) fail(errc::invalid_spec, "at least one season required");
        double wsum = 0.0;
        for (const auto& [label, w] : seasons) {
            if (label.empty()) fail(errc::invalid_spec, "season label must be non-empty");
            if (w < 0) fail(errc::invalid_spec, "season weights must be >= 0");
            wsum += w;
        }
        if (std::abs(wsum - 1.0) > 1e-9) fail(errc::invalid_spec, "season weights must sum to 1");
    }
};

/// Columns: field_id, the five soil properties, applied_{n,p,k}, yield_kgha,
/// season. Soil draws are clamped to physical ranges (pH 0..14, organic
/// matter 0..100 %, nutrient stocks >= 0); yield is floored at 0.
inline table gen_trials(const trial_gen_params& params, rng& r) {
    params.validate();
    std::vector<double> chol(params.soil_cov.begin(), params.soil_cov.end());
    if (!cholesky(chol, 5))
        fail(errc::not_positive_semi_definite, "soil covariance has no Cholesky factor");

    rng soil_rng = r.split("soil");
    rng rate_rng = r.split("rates");
    rng noise_rng = r.split("yield_noise");
    rng season_rng = r.split("season");

    static constexpr std::array<std::pair<double, double>, 5> soil_limits{
        std::pair{0.0, 14.0}, std::pair{0.0, 100.0}, std::pair{0.0, 1e12},
        std::pair{0.0, 1e12}, std::pair{0.0, 1e12}};

    std::vector<int64_t> ids;
    std::array<std::vector<double>, 5> soil_cols;
    std::array<std::vector<double>, 3> rate_cols;
    std::vector<double> yields;
    std::vector<std::string> season_col;
    ids.reserve(params.n);
    yields.reserve(params.n);

    const std::vector<double> means(params.soil_means.begin(), params.soil_means.end());
    for (size_t i = 0; i < params.n; ++i) {
        auto soil_vec = draw_mvn(means, chol, 5, soil_rng);
        std::array<double, 5> soil{};
        for (size_t j = 0; j < 5; ++j) {
            soil[j] = std::clamp(soil_vec[j], soil_limits[j].first, soil_limits[j].second);
            soil_cols[j].push_back(soil[j]);
        }
        std::array<double, 3> rates{};
        for (size_t j = 0; j < 3; ++j) {
            const auto& [lo, hi] = params.rate_ranges[j];
            rates[j] = lo == hi ? lo : rate_rng.uniform(lo, hi);
            rate_cols[j].push_back(rates[j]);
        }
        double y = params.response.evaluate(soil, rates[0], rates[1], rates[2]);
        if (params.response.noise_sigma > 0)
            y += noise_rng.normal(0.0, params.response.noise_sigma);
        yields.push_back(std::max(0.0, y));

        const double u = season_rng.uniform();
        double acc = 0.0;
        std::string label = params.seasons.back().first;
        for (const auto& [name, w] : params.seasons) {
            acc += w;
            if (u < acc) {
                label = name;
                break;
            }
        }
        season_col.push_back(label);
        ids.push_back(static_cast<int64_t>(i));
    }

    table t;
    t.add_column(int_column("field_id", std::move(ids)));
    for (size_t j = 0; j < 5; ++j)
        t.add_column(float_column(soil_property_names[j], std::move(soil_cols[j])));
    t.add_column(float_column("applied_n", std::move(rate_cols[0]), "kg/ha"));
    t.add_column(float_column("applied_p", std::move(rate_cols[1]), "kg/ha"));
    t.add_column(float_column("applied_k", std::move(rate_cols[2]), "kg/ha"));
    t.add_column(float_column("yield_kgha", std::move(yields), "kg/ha"));
    t.add_column(category_column("season", std::move(season_col)));
    return t;
}

}  // namespace sagda
