#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sagda/error.hpp"
#include "sagda/model.hpp"
#include "sagda/rng.hpp"
#include "sagda/stats.hpp"
#include "sagda/table.hpp"

namespace sagda {

struct npk_rates {
    double n = 0.0;
    double p = 0.0;
    double k = 0.0;

    double total() const { return n + p + k; }
    double operator[](size_t i) const { return i == 0 ? n : i == 1 ? p : k; }
    double& operator[](size_t i) { return i == 0 ? n : i == 1 ? p : k; }
};

using rate_bounds = std::array<std::pair<double, double>, 3>;

struct objective_spec {
    double w_yield = 1.0;
    double w_nue = 0.0;
    double w_env = 0.0;
    rate_bounds bounds{std::pair{0.0, 200.0}, std::pair{0.0, 120.0}, std::pair{0.0, 150.0}};
    double total_cap = std::numeric_limits<double>::infinity();
    std::array<double, 3> sensitivity{std::numeric_limits<double>::infinity(),
                                      std::numeric_limits<double>::infinity(),
                                      std::numeric_limits<double>::infinity()};
    double penalty = 1000.0;  // M

    void validate() const {
        if (w_yield < 0 || w_nue < 0 || w_env < 0)
            fail(errc::invalid_config, "objective weights must be >= 0");
        if (w_yield == 0 && w_nue == 0 && w_env == 0)
            fail(errc::invalid_config, "at least one objective weight must be > 0");
        for (const auto& [lo, hi] : bounds)
            if (lo > hi) fail(errc::invalid_config, "rate bounds need lo <= hi");
        if (penalty <= 0) fail(errc::invalid_config, "penalty coefficient must be > 0");
    }
};

/// Per-field yield prediction as a function of the fertilizer decision.
using yield_fn = std::function<double(const npk_rates&)>;

struct objective_parts {
    double delta_yield = 0.0;  // vs the zero-fertilizer counterfactual
    double nue = 0.0;          // yield gain per kg applied
    double env = 0.0;          // squared excess over sensitivity thresholds
    double violation = 0.0;    // constraint excess, 0 inside the feasible set
    double score = 0.0;
};

inline objective_parts objective_detail(const npk_rates& rates, const yield_fn& predict,
                                        const objective_spec& spec) {
    objective_parts out;
    double y_with, y_zero;
    try {
        y_with = predict(rates);
        y_zero = predict(npk_rates{0, 0, 0});
    } catch (const error&) {
        throw;
    } catch (const std::exception& e) {
        fail(errc::model_failure, e.what());
    }
    out.delta_yield = y_with - y_zero;
    const double total = rates.total();
    out.nue = total > 0 ? out.delta_yield / total : 0.0;
    for (size_t i = 0; i < 3; ++i) {
        const double excess = std::max(0.0, rates[i] - spec.sensitivity[i]);
        out.env += excess * excess;
    }
    out.violation = std::max(0.0, total - spec.total_cap);
    for (size_t i = 0; i < 3; ++i) {
        out.violation += std::max(0.0, spec.bounds[i].first - rates[i]);
        out.violation += std::max(0.0, rates[i] - spec.bounds[i].second);
    }
    out.score = spec.w_yield * out.delta_yield + spec.w_nue * out.nue - spec.w_env * out.env -
                spec.penalty * out.violation;
    return out;
}

inline double objective(const npk_rates& rates, const yield_fn& predict,
                        const objective_spec& spec) {
    return objective_detail(rates, predict, spec).score;
}

// ---------------------------------------------------------------------------
// Metaheuristics. Both return the best-ever state plus a per-iteration
// best-score trace, which is non-decreasing by construction.
// ---------------------------------------------------------------------------

using score_fn = std::function<double(const npk_rates&)>;

struct sa_config {
    double t0 = 50.0;        // initial temperature, > 0
    double alpha = 0.99;     // cooling factor, in (0,1)
    size_t iters = 5000;     // >= 1
    double step_sigma = 8.0; // proposal spread, kg/ha

    void validate() const {
        if (t0 <= 0 || alpha <= 0 || alpha >= 1 || iters < 1 || step_sigma <= 0)
            fail(errc::invalid_config, "sa needs t0>0, 0<alpha<1, iters>=1, step_sigma>0");
    }
};

struct pso_config {
    size_t particles = 30;  // >= 2
    double inertia = 0.7;
    double c1 = 1.5;
    double c2 = 1.5;
    size_t iters = 200;

    void validate() const {
        if (particles < 2 || iters < 1)
            fail(errc::invalid_config, "pso needs particles >= 2, iters >= 1");
    }
};

struct solver_result {
    npk_rates best;
    double best_score = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;  // best-so-far score per iteration
};

inline npk_rates clip_to(const npk_rates& x, const rate_bounds& bounds) {
    npk_rates out = x;
    for (size_t i = 0; i < 3; ++i)
        out[i] = std::clamp(out[i], bounds[i].first, bounds[i].second);
    return out;
}

/// Metropolis walk from the bounds midpoint with gaussian proposals clipped
/// into the box; T cools by alpha each iteration.
inline solver_result simulated_annealing(const score_fn& f, const rate_bounds& bounds,
                                         const sa_config& cfg, rng& r) {
    cfg.validate();
    for (const auto& [lo, hi] : bounds)
        if (lo > hi) fail(errc::invalid_config, "bounds need lo <= hi");

    npk_rates x{(bounds[0].first + bounds[0].second) / 2.0,
                (bounds[1].first + bounds[1].second) / 2.0,
                (bounds[2].first + bounds[2].second) / 2.0};
    double fx = f(x);

    solver_result out;
    out.best = x;
    out.best_score = fx;
    out.trace.reserve(cfg.iters);

    double t = cfg.t0;
    for (size_t it = 0; it < cfg.iters; ++it) {
        npk_rates prop = x;
        for (size_t c = 0; c < 3; ++c) prop[c] += r.normal(0.0, cfg.step_sigma);
        prop = clip_to(prop, bounds);
        const double fp = f(prop);
        const double delta = fp - fx;
        if (delta >= 0.0 || r.uniform() < std::exp(delta / t)) {
            x = prop;
            fx = fp;
        }
        if (fx > out.best_score) {
            out.best_score = fx;
            out.best = x;
        }
        out.trace.push_back(out.best_score);
        t *= cfg.alpha;
    }
    return out;
}

/// Global-best PSO with synchronous gbest updates (gbest moves only between
/// iterations). Each particle draws from its own split stream, so a parallel
/// evaluation with the same streams would reproduce this sequential result
/// bit for bit. Positions clip to the box and the clipped coordinate's
/// velocity zeroes out.
inline solver_result particle_swarm(const score_fn& f, const rate_bounds& bounds,
                                    const pso_config& cfg, rng& r) {
    cfg.validate();
    for (const auto& [lo, hi] : bounds)
        if (lo > hi) fail(errc::invalid_config, "bounds need lo <= hi");

    struct particle {
        npk_rates x;
        npk_rates v{0, 0, 0};
        npk_rates pbest;
        double pbest_score;
        rng stream;
    };

    std::vector<particle> swarm;
    swarm.reserve(cfg.particles);
    solver_result out;
    for (size_t i = 0; i < cfg.particles; ++i) {
        particle p{{}, {0, 0, 0}, {}, 0.0, r.split("particle-" + std::to_string(i))};
        for (size_t c = 0; c < 3; ++c)
            p.x[c] = p.stream.uniform(bounds[c].first, bounds[c].second);
        p.pbest = p.x;
        p.pbest_score = f(p.x);
        if (p.pbest_score > out.best_score) {
            out.best_score = p.pbest_score;
            out.best = p.x;
        }
        swarm.push_back(std::move(p));
    }

    out.trace.reserve(cfg.iters);
    for (size_t it = 0; it < cfg.iters; ++it) {
        const npk_rates gbest = out.best;  // frozen for this iteration
        for (particle& p : swarm) {
            for (size_t c = 0; c < 3; ++c) {
                const double r1 = p.stream.uniform();
                const double r2 = p.stream.uniform();
                p.v[c] = cfg.inertia * p.v[c] + cfg.c1 * r1 * (p.pbest[c] - p.x[c]) +
                         cfg.c2 * r2 * (gbest[c] - p.x[c]);
                p.x[c] += p.v[c];
                if (p.x[c] < bounds[c].first) {
                    p.x[c] = bounds[c].first;
                    p.v[c] = 0.0;
                } else if (p.x[c] > bounds[c].second) {
                    p.x[c] = bounds[c].second;
                    p.v[c] = 0.0;
                }
            }
            const double fx = f(p.x);
            if (fx > p.pbest_score) {
                p.pbest_score = fx;
                p.pbest = p.x;
            }
        }
        for (const particle& p : swarm) {
            if (p.pbest_score > out.best_score) {
                out.best_score = p.pbest_score;
                out.best = p.pbest;
            }
        }
        out.trace.push_back(out.best_score);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Site-specific recommendations over a trials table and a trained surrogate.
// ---------------------------------------------------------------------------

struct recommend_config {
    objective_spec objective;
    sa_config sa;
    pso_config pso;
};

/// Builds the per-field yield closure by substituting candidate rates into
/// the applied_n/p/k feature slots; every other model feature comes from the
/// field row.
inline yield_fn field_predictor(const model& m, const table& trials, size_t row) {
    const auto& features = model_features(m);
    std::vector<double> base(features.size());
    std::array<long, 3> rate_slot{-1, -1, -1};
    const std::array<const char*, 3> rate_names{"applied_n", "applied_p", "applied_k"};
    for (size_t f = 0; f < features.size(); ++f) {
        bool is_rate = false;
        for (size_t ridx = 0; ridx < 3; ++ridx) {
            if (features[f] == rate_names[ridx]) {
                rate_slot[ridx] = static_cast<long>(f);
                is_rate = true;
            }
        }
        if (!is_rate) base[f] = trials.numeric(features[f])[row];
    }
    for (long s : rate_slot)
        if (s < 0) fail(errc::model_failure, "model lacks applied_n/p/k features");
    return [m, base, rate_slot](const npk_rates& rates) mutable {
        base[static_cast<size_t>(rate_slot[0])] = rates.n;
        base[static_cast<size_t>(rate_slot[1])] = rates.p;
        base[static_cast<size_t>(rate_slot[2])] = rates.k;
        return predict_row(m, base);
    };
}

/// Runs both solvers per field row and keeps the higher-scoring result.
/// Output columns: field_id, rec_n, rec_p, rec_k, predicted_gain, nue,
/// env_score, solver_used.
inline table recommend_npk(const table& trials, const model& m, const recommend_config& cfg,
                           rng& r) {
    cfg.objective.validate();
    cfg.sa.validate();
    cfg.pso.validate();

    std::vector<int64_t> ids;
    std::vector<double> rec_n, rec_p, rec_k, gain, nue, env;
    std::vector<std::string> solver;

    const bool has_ids = trials.has_column("field_id");
    for (size_t row = 0; row < trials.n_rows(); ++row) {
        const yield_fn predict = field_predictor(m, trials, row);
        const score_fn f = [&](const npk_rates& x) {
            return objective(x, predict, cfg.objective);
        };
        const int64_t id =
            has_ids ? trials.ints("field_id")[row] : static_cast<int64_t>(row);
        rng sa_rng = r.split("sa-" + std::to_string(id));
        rng pso_rng = r.split("pso-" + std::to_string(id));
        const solver_result sa_res = simulated_annealing(f, cfg.objective.bounds, cfg.sa, sa_rng);
        const solver_result pso_res = particle_swarm(f, cfg.objective.bounds, cfg.pso, pso_rng);
        const bool sa_wins = sa_res.best_score >= pso_res.best_score;
        const solver_result& win = sa_wins ? sa_res : pso_res;

        const objective_parts parts = objective_detail(win.best, predict, cfg.objective);
        ids.push_back(id);
        rec_n.push_back(win.best.n);
        rec_p.push_back(win.best.p);
        rec_k.push_back(win.best.k);
        gain.push_back(parts.delta_yield);
        nue.push_back(parts.nue);
        env.push_back(parts.env);
        solver.emplace_back(sa_wins ? "sa" : "pso");
    }

    table out;
    out.add_column(int_column("field_id", std::move(ids)));
    out.add_column(float_column("rec_n", std::move(rec_n), "kg/ha"));
    out.add_column(float_column("rec_p", std::move(rec_p), "kg/ha"));
    out.add_column(float_column("rec_k", std::move(rec_k), "kg/ha"));
    out.add_column(float_column("predicted_gain", std::move(gain), "kg/ha"));
    out.add_column(float_column("nue", std::move(nue)));
    out.add_column(float_column("env_score", std::move(env)));
    out.add_column(category_column("solver_used", std::move(solver)));
    return out;
}

/// EV = max(0, 1 - Var(recommended - observed) / Var(observed)) * 100.
/// Offset-invariant by construction: a constant shift has zero variance.
inline double explained_variability(std::span<const double> recommended,
                                    std::span<const double> observed) {
    if (recommended.size() != observed.size())
        fail(errc::length_mismatch, "series lengths differ");
    if (recommended.size() < 2) fail(errc::length_mismatch, "need at least 2 observations");
    std::vector<double> diff(recommended.size());
    for (size_t i = 0; i < diff.size(); ++i) diff[i] = recommended[i] - observed[i];
    const double var_obs = sample_variance(observed);
    if (var_obs == 0.0) fail(errc::zero_variance, "observed series has zero variance");
    return std::max(0.0, 1.0 - sample_variance(diff) / var_obs) * 100.0;
}

}  // namespace sagda
