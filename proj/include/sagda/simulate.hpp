#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "sagda/error.hpp"
#include "sagda/generate.hpp"
#include "sagda/optimize.hpp"
#include "sagda/table.hpp"

namespace sagda {

/// Growth stages driven by cumulative growing degree days. Stage 0 is the
/// pre-emergence period; each threshold crossing advances one stage.
enum class crop_stage : int {
    sowing = 0,
    emergence = 1,
    vegetative = 2,
    flowering = 3,
    maturity = 4,
};

struct crop_params {
    double t_base = 10.0;  // deg C
    std::array<double, 4> stage_gdd{80.0, 400.0, 700.0, 1000.0};  // strictly increasing
    double potential_yield = 5000.0;  // kg/ha
    double water_capacity = 100.0;    // mm
    double daily_et = 4.0;            // mm/day
    std::array<double, 5> stress_weight{0.2, 0.6, 0.8, 1.0, 0.3};  // per stage, in [0,1]

    void validate() const {
        for (size_t i = 1; i < stage_gdd.size(); ++i)
            if (stage_gdd[i] <= stage_gdd[i - 1])
                fail(errc::invalid_spec, "stage thresholds must be strictly increasing");
        if (water_capacity <= 0) fail(errc::invalid_spec, "water capacity must be > 0");
        if (daily_et < 0) fail(errc::invalid_spec, "daily ET must be >= 0");
        if (potential_yield < 0) fail(errc::invalid_spec, "potential yield must be >= 0");
        for (double w : stress_weight)
            if (w < 0 || w > 1) fail(errc::invalid_spec, "stress weights must lie in [0,1]");
    }
};

struct management_action {
    size_t day = 0;  // 0-based index into the weather series
    enum class kind { fertilize, irrigate } action = kind::irrigate;
    npk_rates rates;      // fertilize
    double water_mm = 0;  // irrigate
};

struct season_log {
    table daily;  // date, gdd_cum, stage, soil_water, stress
    double final_yield = 0.0;
    npk_rates nutrients_applied;  // ledger only; yield coupling is out of scope
};

/// Day-by-day bucket simulation. GDD_d = max(0, (tmax+tmin)/2 - t_base)
/// accumulates into stage progression; soil water follows
/// water_{d+1} = clamp(water_d + rain_d + irrigation_d - daily_et, 0, cap)
/// from a full initial bucket, and stress_d = water_d / cap uses the
/// start-of-day level. Final yield is the potential scaled by the
/// stage-weighted mean stress.
inline season_log run_season(const table& weather, const crop_params& crop,
                             std::vector<management_action> actions) {
    crop.validate();
    const size_t n_days = weather.n_rows();
    if (n_days == 0) fail(errc::empty_weather, "weather series is empty");
    const auto& days = weather.dates("date");
    const auto& tmin = weather.floats("tmin");
    const auto& tmax = weather.floats("tmax");
    const auto& rain = weather.floats("rain_mm");

    std::sort(actions.begin(), actions.end(),
              [](const management_action& a, const management_action& b) { return a.day < b.day; });
    for (const auto& a : actions) {
        if (a.day >= n_days)
            fail(errc::action_out_of_range,
                 "action day " + std::to_string(a.day) + " beyond season length");
        if (a.water_mm < 0 || a.rates.n < 0 || a.rates.p < 0 || a.rates.k < 0)
            fail(errc::invalid_spec, "action amounts must be >= 0");
    }

    std::vector<double> irrigation(n_days, 0.0);
    npk_rates ledger;
    for (const auto& a : actions) {
        if (a.action == management_action::kind::irrigate) {
            irrigation[a.day] += a.water_mm;
        } else {
            ledger.n += a.rates.n;
            ledger.p += a.rates.p;
            ledger.k += a.rates.k;
        }
    }

    std::vector<double> gdd_cum_col, water_col, stress_col;
    std::vector<int64_t> stage_col;
    gdd_cum_col.reserve(n_days);

    double gdd_cum = 0.0;
    double water = crop.water_capacity;
    double weighted_stress = 0.0;
    double weight_sum = 0.0;
    for (size_t d = 0; d < n_days; ++d) {
        gdd_cum += std::max(0.0, (tmax[d] + tmin[d]) / 2.0 - crop.t_base);
        int stage = 0;
        for (size_t s = 0; s < crop.stage_gdd.size(); ++s)
            if (gdd_cum >= crop.stage_gdd[s]) stage = static_cast<int>(s) + 1;

        const double stress = water / crop.water_capacity;
        const double w = crop.stress_weight[static_cast<size_t>(stage)];
        weighted_stress += stress * w;
        weight_sum += w;

        gdd_cum_col.push_back(gdd_cum);
        stage_col.push_back(stage);
        water_col.push_back(water);
        stress_col.push_back(stress);

        water = std::clamp(water + rain[d] + irrigation[d] - crop.daily_et, 0.0,
                           crop.water_capacity);
    }

    season_log log;
    log.daily.add_column(date_column("date", days));
    log.daily.add_column(float_column("gdd_cum", std::move(gdd_cum_col), "degC day"));
    log.daily.add_column(int_column("stage", std::move(stage_col)));
    log.daily.add_column(float_column("soil_water", std::move(water_col), "mm"));
    log.daily.add_column(float_column("stress", std::move(stress_col)));
    log.final_yield =
        weight_sum > 0 ? crop.potential_yield * weighted_stress / weight_sum : 0.0;
    log.nutrients_applied = ledger;
    return log;
}

/// Real series followed by extend_days of synthetic weather; the Markov
/// wet/dry chain seeds from the last real day and dates continue with no gap.
inline table blend_weather(const table& real, const weather_params& params, size_t extend_days,
                           rng& r) {
    if (real.n_rows() == 0) fail(errc::empty_weather, "real weather series is empty");
    table out = real;
    if (extend_days == 0) return out;
    const bool last_wet = real.floats("rain_mm").back() > 0.0;
    const date next = add_days(real.dates("date").back(), 1);
    table synth = gen_weather(params, next, extend_days, r, last_wet);
    out.append_rows(synth);
    return out;
}

}  // namespace sagda
