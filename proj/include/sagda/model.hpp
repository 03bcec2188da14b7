#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sagda/error.hpp"
#include "sagda/rng.hpp"
#include "sagda/stats.hpp"
#include "sagda/table.hpp"

namespace sagda {

// ---------------------------------------------------------------------------
// Feature extraction: numeric columns only, row-major design matrix.
// ---------------------------------------------------------------------------

struct design_matrix {
    std::vector<std::string> cols;
    size_t n_rows = 0;
    std::vector<double> x;  // n_rows x cols.size()

    std::span<const double> row(size_t i) const {
        return {x.data() + i * cols.size(), cols.size()};
    }
};

inline design_matrix features_from(const table& t, const std::vector<std::string>& cols) {
    if (cols.empty()) fail(errc::non_numeric_feature, "no feature columns given");
    design_matrix m;
    m.cols = cols;
    m.n_rows = t.n_rows();
    std::vector<std::vector<double>> data;
    for (const auto& name : cols) {
        const column& c = t.col(name);
        if (c.type != dtype::float64 && c.type != dtype::int64)
            fail(errc::non_numeric_feature, "feature '" + name + "' is not numeric");
        data.push_back(t.numeric(name));
    }
    m.x.resize(m.n_rows * cols.size());
    for (size_t r = 0; r < m.n_rows; ++r)
        for (size_t f = 0; f < cols.size(); ++f) m.x[r * cols.size() + f] = data[f][r];
    return m;
}

// ---------------------------------------------------------------------------
// Base regressors
// ---------------------------------------------------------------------------

struct regressor_spec {
    enum class kind { ridge, knn, tree };
    kind k = kind::ridge;
    double lambda = 1.0;   // ridge penalty, >= 0 (intercept never penalized)
    size_t knn_k = 5;      // neighbors
    size_t max_depth = 6;  // tree
    size_t min_leaf = 3;   // tree

    void validate() const {
        if (k == kind::ridge && lambda < 0) fail(errc::invalid_spec, "ridge needs lambda >= 0");
        if (k == kind::knn && knn_k < 1) fail(errc::invalid_spec, "knn needs k >= 1");
        if (k == kind::tree && (max_depth < 1 || min_leaf < 1))
            fail(errc::invalid_spec, "tree needs max_depth >= 1, min_leaf >= 1");
    }
};

struct ridge_model {
    std::vector<std::string> feature_cols;
    double intercept = 0.0;
    std::vector<double> coef;

    double predict_row(std::span<const double> row) const {
        double y = intercept;
        for (size_t f = 0; f < coef.size(); ++f) y += coef[f] * row[f];
        return y;
    }
};

struct knn_model {
    std::vector<std::string> feature_cols;
    size_t k = 5;
    std::vector<double> mean;
    std::vector<double> stddev;  // 0 => feature is constant and drops out
    std::vector<double> x_scaled;  // n x features, row-major
    std::vector<double> y;

    double predict_row(std::span<const double> row) const {
        const size_t nf = feature_cols.size();
        const size_t n = y.size();
        std::vector<double> q(nf);
        for (size_t f = 0; f < nf; ++f)
            q[f] = stddev[f] == 0.0 ? 0.0 : (row[f] - mean[f]) / stddev[f];
        std::vector<std::pair<double, size_t>> dist(n);
        for (size_t i = 0; i < n; ++i) {
            double d2 = 0.0;
            for (size_t f = 0; f < nf; ++f) {
                const double diff = x_scaled[i * nf + f] - q[f];
                d2 += diff * diff;
            }
            dist[i] = {d2, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
        double s = 0.0;
        for (size_t i = 0; i < k; ++i) s += y[dist[i].second];
        return s / static_cast<double>(k);
    }
};

struct tree_node {
    int feature = -1;  // -1 => leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
};

struct tree_model {
    std::vector<std::string> feature_cols;
    std::vector<tree_node> nodes;  // nodes[0] is the root

    double predict_row(std::span<const double> row) const {
        int at = 0;
        for (;;) {
            const tree_node& n = nodes[static_cast<size_t>(at)];
            if (n.feature < 0) return n.value;
            at = row[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
    }
};

namespace detail {

inline ridge_model fit_ridge(const design_matrix& m, std::span<const double> y, double lambda) {
    const size_t p = m.cols.size() + 1;  // intercept first
    std::vector<double> gram(p * p, 0.0);
    std::vector<double> rhs(p, 0.0);
    for (size_t r = 0; r < m.n_rows; ++r) {
        const auto row = m.row(r);
        for (size_t i = 0; i < p; ++i) {
            const double xi = i == 0 ? 1.0 : row[i - 1];
            rhs[i] += xi * y[r];
            for (size_t j = i; j < p; ++j) {
                const double xj = j == 0 ? 1.0 : row[j - 1];
                gram[i * p + j] += xi * xj;
            }
        }
    }
    for (size_t i = 0; i < p; ++i)
        for (size_t j = 0; j < i; ++j) gram[i * p + j] = gram[j * p + i];
    for (size_t i = 1; i < p; ++i) gram[i * p + i] += lambda;  // intercept unpenalized

    std::vector<double> chol = gram;
    if (!cholesky(chol, p))
        fail(errc::singular_system, "ridge normal equations are singular (lambda too small?)");
    cholesky_solve(chol, p, rhs);

    ridge_model out;
    out.feature_cols = m.cols;
    out.intercept = rhs[0];
    out.coef.assign(rhs.begin() + 1, rhs.end());
    return out;
}

inline knn_model fit_knn(const design_matrix& m, std::span<const double> y, size_t k) {
    if (k > m.n_rows) fail(errc::k_too_large, "knn k exceeds training rows");
    knn_model out;
    out.feature_cols = m.cols;
    out.k = k;
    const size_t nf = m.cols.size();
    for (size_t f = 0; f < nf; ++f) {
        std::vector<double> col(m.n_rows);
        for (size_t r = 0; r < m.n_rows; ++r) col[r] = m.x[r * nf + f];
        out.mean.push_back(mean(col));
        out.stddev.push_back(sample_stddev(col));
    }
    out.x_scaled.resize(m.n_rows * nf);
    for (size_t r = 0; r < m.n_rows; ++r)
        for (size_t f = 0; f < nf; ++f)
            out.x_scaled[r * nf + f] =
                out.stddev[f] == 0.0 ? 0.0 : (m.x[r * nf + f] - out.mean[f]) / out.stddev[f];
    out.y.assign(y.begin(), y.end());
    return out;
}

struct tree_builder {
    const design_matrix& m;
    std::span<const double> y;
    size_t max_depth;
    size_t min_leaf;
    std::vector<tree_node> nodes;

    int build(std::vector<size_t> rows, size_t depth) {
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({});
        double sum = 0.0;
        for (size_t r : rows) sum += y[r];
        const double node_mean = sum / static_cast<double>(rows.size());
        nodes[static_cast<size_t>(id)].value = node_mean;

        if (depth >= max_depth || rows.size() < 2 * min_leaf) return id;

        double node_sse = 0.0;
        for (size_t r : rows) node_sse += (y[r] - node_mean) * (y[r] - node_mean);

        // best split = largest SSE reduction; ties resolve to the first
        // (feature index, threshold) encountered, which keeps fits stable
        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;

        const size_t nf = m.cols.size();
        std::vector<std::pair<double, double>> vals(rows.size());
        for (size_t f = 0; f < nf; ++f) {
            for (size_t i = 0; i < rows.size(); ++i)
                vals[i] = {m.x[rows[i] * nf + f], y[rows[i]]};
            std::sort(vals.begin(), vals.end());

            double left_sum = 0.0, left_sq = 0.0;
            double right_sum = 0.0, right_sq = 0.0;
            for (const auto& [xv, yv] : vals) {
                right_sum += yv;
                right_sq += yv * yv;
            }
            for (size_t i = 0; i + 1 < vals.size(); ++i) {
                left_sum += vals[i].second;
                left_sq += vals[i].second * vals[i].second;
                right_sum -= vals[i].second;
                right_sq -= vals[i].second * vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue;
                const size_t nl = i + 1, nr = vals.size() - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                const double sse_l = left_sq - left_sum * left_sum / static_cast<double>(nl);
                const double sse_r = right_sq - right_sum * right_sum / static_cast<double>(nr);
                const double gain = node_sse - sse_l - sse_r;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = (vals[i].first + vals[i + 1].first) / 2.0;
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<size_t> left, right;
        for (size_t r : rows)
            (m.x[r * nf + static_cast<size_t>(best_feature)] <= best_threshold ? left : right)
                .push_back(r);
        const int l = build(std::move(left), depth + 1);
        const int rgt = build(std::move(right), depth + 1);
        nodes[static_cast<size_t>(id)].feature = best_feature;
        nodes[static_cast<size_t>(id)].threshold = best_threshold;
        nodes[static_cast<size_t>(id)].left = l;
        nodes[static_cast<size_t>(id)].right = rgt;
        return id;
    }
};

inline tree_model fit_tree(const design_matrix& m, std::span<const double> y, size_t max_depth,
                           size_t min_leaf) {
    tree_builder b{m, y, max_depth, min_leaf, {}};
    std::vector<size_t> rows(m.n_rows);
    std::iota(rows.begin(), rows.end(), size_t{0});
    b.build(std::move(rows), 0);
    tree_model out;
    out.feature_cols = m.cols;
    out.nodes = std::move(b.nodes);
    return out;
}

}  // namespace detail

using base_model = std::variant<ridge_model, knn_model, tree_model>;

inline double predict_row(const base_model& m, std::span<const double> row) {
    return std::visit([&](const auto& mm) { return mm.predict_row(row); }, m);
}

inline base_model fit(const regressor_spec& spec, const design_matrix& m,
                      std::span<const double> y) {
    spec.validate();
    if (m.n_rows < 1) fail(errc::too_few_rows, "fit needs at least 1 row");
    switch (spec.k) {
        case regressor_spec::kind::ridge: return detail::fit_ridge(m, y, spec.lambda);
        case regressor_spec::kind::knn: return detail::fit_knn(m, y, spec.knn_k);
        case regressor_spec::kind::tree:
            return detail::fit_tree(m, y, spec.max_depth, spec.min_leaf);
    }
    fail(errc::invalid_spec, "unknown regressor kind");
}

inline base_model fit(const regressor_spec& spec, const table& t,
                      const std::vector<std::string>& feature_cols, const std::string& target) {
    return fit(spec, features_from(t, feature_cols), t.floats(target));
}

inline std::vector<double> predict(const base_model& m, const design_matrix& x) {
    std::vector<double> out;
    out.reserve(x.n_rows);
    for (size_t r = 0; r < x.n_rows; ++r) out.push_back(predict_row(m, x.row(r)));
    return out;
}

// ---------------------------------------------------------------------------
// Stacked ensemble with a linear meta-learner over out-of-fold predictions.
// ---------------------------------------------------------------------------

struct stack_spec {
    std::vector<regressor_spec> bases;
    size_t folds = 5;

    void validate() const {
        if (bases.size() < 2) fail(errc::invalid_spec, "stack needs >= 2 base learners");
        if (folds < 2) fail(errc::invalid_spec, "stack needs >= 2 folds");
        for (const auto& b : bases) b.validate();
    }
};

struct stacked_model {
    std::vector<base_model> bases;  // refit on all rows
    double meta_intercept = 0.0;
    std::vector<double> meta_weights;  // one per base

    double predict_row(std::span<const double> row) const {
        double yhat = meta_intercept;
        for (size_t b = 0; b < bases.size(); ++b)
            yhat += meta_weights[b] * sagda::predict_row(bases[b], row);
        return yhat;
    }
};

/// Fold assignment is a seeded Fisher-Yates shuffle followed by position mod
/// folds, so the same (data, seed) always yields the same stack. The meta
/// OLS runs through the eigenvalue pseudo-inverse: identical bases then
/// share weight evenly instead of producing a singular system.
inline stacked_model fit_stacked(const stack_spec& spec, const design_matrix& m,
                                 std::span<const double> y, rng& r) {
    spec.validate();
    if (m.n_rows < spec.folds) fail(errc::too_few_rows, "need rows >= folds");

    std::vector<size_t> order(m.n_rows);
    std::iota(order.begin(), order.end(), size_t{0});
    for (size_t i = m.n_rows - 1; i > 0; --i)
        std::swap(order[i], order[r.uniform_index(i + 1)]);
    std::vector<size_t> fold_of(m.n_rows);
    for (size_t pos = 0; pos < m.n_rows; ++pos) fold_of[order[pos]] = pos % spec.folds;

    const size_t nb = spec.bases.size();
    std::vector<std::vector<double>> oof(nb, std::vector<double>(m.n_rows, 0.0));
    const size_t nf = m.cols.size();
    for (size_t f = 0; f < spec.folds; ++f) {
        design_matrix train;
        train.cols = m.cols;
        std::vector<double> train_y;
        std::vector<size_t> holdout;
        for (size_t row = 0; row < m.n_rows; ++row) {
            if (fold_of[row] == f) {
                holdout.push_back(row);
            } else {
                train.x.insert(train.x.end(), m.x.begin() + static_cast<long>(row * nf),
                               m.x.begin() + static_cast<long>((row + 1) * nf));
                train_y.push_back(y[row]);
            }
        }
        train.n_rows = train_y.size();
        if (train.n_rows == 0) fail(errc::too_few_rows, "a fold emptied the training side");
        for (size_t b = 0; b < nb; ++b) {
            const base_model bm = fit(spec.bases[b], train, train_y);
            for (size_t row : holdout) oof[b][row] = predict_row(bm, m.row(row));
        }
    }

    // meta least squares over [1, oof_0, ..., oof_{nb-1}]
    const size_t p = nb + 1;
    std::vector<double> gram(p * p, 0.0), rhs(p, 0.0);
    for (size_t row = 0; row < m.n_rows; ++row) {
        for (size_t i = 0; i < p; ++i) {
            const double xi = i == 0 ? 1.0 : oof[i - 1][row];
            rhs[i] += xi * y[row];
            for (size_t j = i; j < p; ++j) {
                const double xj = j == 0 ? 1.0 : oof[j - 1][row];
                gram[i * p + j] += xi * xj;
            }
        }
    }
    for (size_t i = 0; i < p; ++i)
        for (size_t j = 0; j < i; ++j) gram[i * p + j] = gram[j * p + i];
    const std::vector<double> beta = pinv_least_squares(gram, p, rhs);

    stacked_model out;
    out.meta_intercept = beta[0];
    out.meta_weights.assign(beta.begin() + 1, beta.end());
    for (const auto& bs : spec.bases) out.bases.push_back(fit(bs, m, y));
    return out;
}

using model = std::variant<ridge_model, knn_model, tree_model, stacked_model>;

inline double predict_row(const model& m, std::span<const double> row) {
    return std::visit([&](const auto& mm) { return mm.predict_row(row); }, m);
}

inline std::vector<double> predict(const model& m, const design_matrix& x) {
    std::vector<double> out;
    out.reserve(x.n_rows);
    for (size_t r = 0; r < x.n_rows; ++r) out.push_back(predict_row(m, x.row(r)));
    return out;
}

inline const std::vector<std::string>& model_features(const model& m) {
    return std::visit([](const auto& mm) -> const std::vector<std::string>& {
        if constexpr (std::is_same_v<std::decay_t<decltype(mm)>, stacked_model>)
            return std::visit(
                [](const auto& b) -> const std::vector<std::string>& { return b.feature_cols; },
                mm.bases.front());
        else
            return mm.feature_cols;
    }, m);
}

// ---------------------------------------------------------------------------
// Temporal holdout and evaluation metrics
// ---------------------------------------------------------------------------

/// Whole seasons go to the test side; train gets the complement. This is a
/// partition by construction: no row can leak across.
inline std::pair<table, table> temporal_split(const table& t, const std::string& season_col,
                                              const std::set<std::string>& test_seasons) {
    if (test_seasons.empty()) fail(errc::unknown_season, "test_seasons must be non-empty");
    const auto& seasons = t.cats(season_col);
    const std::set<std::string> observed(seasons.begin(), seasons.end());
    for (const auto& s : test_seasons)
        if (!observed.contains(s)) fail(errc::unknown_season, "season '" + s + "' not present");

    std::vector<size_t> train_rows, test_rows;
    for (size_t i = 0; i < seasons.size(); ++i)
        (test_seasons.contains(seasons[i]) ? test_rows : train_rows).push_back(i);
    if (train_rows.empty() || test_rows.empty())
        fail(errc::empty_side, "temporal split left one side empty");
    return {t.take(train_rows), t.take(test_rows)};
}

struct eval_report {
    double mape = 0.0;  // percent
    double rmse = 0.0;  // target units
    double r2 = 0.0;
};

inline eval_report compute_metrics(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) fail(errc::length_mismatch, "metric inputs differ in length");
    if (y.empty()) fail(errc::empty_sample, "metrics need at least one observation");
    double abs_pct = 0.0, sq = 0.0;
    const double y_mean = mean(y);
    double ss_tot = 0.0, ss_res = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) fail(errc::zero_target, "MAPE undefined for zero targets");
        abs_pct += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
        sq += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        ss_tot += (y[i] - y_mean) * (y[i] - y_mean);
    }
    eval_report out;
    const double n = static_cast<double>(y.size());
    out.mape = 100.0 * abs_pct / n;
    out.rmse = std::sqrt(sq / n);
    if (ss_tot == 0.0) fail(errc::zero_variance, "R^2 undefined for constant targets");
    out.r2 = 1.0 - ss_res / ss_tot;
    return out;
}

inline eval_report evaluate(const model& m, const design_matrix& x_test,
                            std::span<const double> y_test) {
    const auto yhat = predict(m, x_test);
    return compute_metrics(y_test, yhat);
}

// ---------------------------------------------------------------------------
// JSON persistence, version-tagged.
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json base_to_json(const base_model& m) {
    nlohmann::json j;
    if (const auto* r = std::get_if<ridge_model>(&m)) {
        j["kind"] = "ridge";
        j["feature_cols"] = r->feature_cols;
        j["intercept"] = r->intercept;
        j["coef"] = r->coef;
    } else if (const auto* k = std::get_if<knn_model>(&m)) {
        j["kind"] = "knn";
        j["feature_cols"] = k->feature_cols;
        j["k"] = k->k;
        j["mean"] = k->mean;
        j["stddev"] = k->stddev;
        j["x_scaled"] = k->x_scaled;
        j["y"] = k->y;
    } else if (const auto* t = std::get_if<tree_model>(&m)) {
        j["kind"] = "tree";
        j["feature_cols"] = t->feature_cols;
        j["nodes"] = nlohmann::json::array();
        for (const auto& n : t->nodes)
            j["nodes"].push_back({{"feature", n.feature},
                                  {"threshold", n.threshold},
                                  {"value", n.value},
                                  {"left", n.left},
                                  {"right", n.right}});
    }
    return j;
}

inline base_model base_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ridge") {
        ridge_model r;
        r.feature_cols = j.at("feature_cols").get<std::vector<std::string>>();
        r.intercept = j.at("intercept").get<double>();
        r.coef = j.at("coef").get<std::vector<double>>();
        return r;
    }
    if (kind == "knn") {
        knn_model k;
        k.feature_cols = j.at("feature_cols").get<std::vector<std::string>>();
        k.k = j.at("k").get<size_t>();
        k.mean = j.at("mean").get<std::vector<double>>();
        k.stddev = j.at("stddev").get<std::vector<double>>();
        k.x_scaled = j.at("x_scaled").get<std::vector<double>>();
        k.y = j.at("y").get<std::vector<double>>();
        return k;
    }
    if (kind == "tree") {
        tree_model t;
        t.feature_cols = j.at("feature_cols").get<std::vector<std::string>>();
        for (const auto& n : j.at("nodes"))
            t.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                               n.at("value").get<double>(), n.at("left").get<int>(),
                               n.at("right").get<int>()});
        return t;
    }
    fail(errc::manifest_parse, "unknown model kind '" + kind + "'");
}

}  // namespace detail

inline nlohmann::json model_to_json(const model& m) {
    nlohmann::json j;
    j["format"] = "sagda-model";
    j["version"] = 1;
    if (const auto* s = std::get_if<stacked_model>(&m)) {
        j["kind"] = "stacked";
        j["meta_intercept"] = s->meta_intercept;
        j["meta_weights"] = s->meta_weights;
        j["bases"] = nlohmann::json::array();
        for (const auto& b : s->bases) j["bases"].push_back(detail::base_to_json(b));
    } else {
        const base_model b = std::visit(
            [](const auto& mm) -> base_model {
                if constexpr (!std::is_same_v<std::decay_t<decltype(mm)>, stacked_model>)
                    return mm;
                else
                    fail(errc::model_failure, "unreachable");
            },
            m);
        j.update(detail::base_to_json(b));
    }
    return j;
}

inline model model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "sagda-model" || j.value("version", 0) != 1)
        fail(errc::manifest_parse, "not a sagda-model v1 document");
    if (j.at("kind").get<std::string>() == "stacked") {
        stacked_model s;
        s.meta_intercept = j.at("meta_intercept").get<double>();
        s.meta_weights = j.at("meta_weights").get<std::vector<double>>();
        for (const auto& b : j.at("bases")) s.bases.push_back(detail::base_from_json(b));
        return s;
    }
    return std::visit([](auto&& b) -> model { return b; }, detail::base_from_json(j));
}

}  // namespace sagda
