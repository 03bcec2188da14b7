#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "sagda/error.hpp"
#include "sagda/rng.hpp"
#include "sagda/stats.hpp"
#include "sagda/table.hpp"

namespace sagda {

/// Name of the provenance column appended by every augmentation op:
/// int64, 0 for original rows, 1 for synthetic ones.
inline constexpr const char* synthetic_col = "synthetic";

namespace detail {

/// Returns a copy of t with the provenance column present (all zero if it
/// was absent). Re-augmenting an already augmented table keeps the old flags.
inline table ensure_provenance(const table& t) {
    table out = t;
    if (!out.has_column(synthetic_col)) {
        out.add_column(int_column(synthetic_col, std::vector<int64_t>(t.n_rows(), 0)));
    } else if (out.col(synthetic_col).type != dtype::int64) {
        fail(errc::type_mismatch, "column 'synthetic' is reserved for provenance flags");
    }
    return out;
}

struct zscale {
    std::vector<double> mean;
    std::vector<double> stddev;  // 0 stays 0; such features drop out of distances
};

inline zscale fit_zscale(const table& t, const std::vector<std::string>& cols) {
    zscale z;
    for (const auto& name : cols) {
        const auto& v = t.floats(name);
        z.mean.push_back(sagda::mean(v));
        z.stddev.push_back(sample_stddev(v));
    }
    return z;
}

/// k nearest rows to `seed` by Euclidean distance on z-scored features,
/// self excluded, ties broken by the lower row index.
inline std::vector<size_t> nearest_neighbors(const std::vector<std::vector<double>>& feats,
                                             const zscale& z, size_t seed, size_t k) {
    const size_t n = feats[0].size();
    std::vector<std::pair<double, size_t>> dist;
    dist.reserve(n - 1);
    for (size_t i = 0; i < n; ++i) {
        if (i == seed) continue;
        double d2 = 0.0;
        for (size_t f = 0; f < feats.size(); ++f) {
            if (z.stddev[f] == 0.0) continue;
            const double diff = (feats[f][i] - feats[f][seed]) / z.stddev[f];
            d2 += diff * diff;
        }
        dist.emplace_back(d2, i);
    }
    std::stable_sort(dist.begin(), dist.end());
    std::vector<size_t> out;
    out.reserve(k);
    for (size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
    return out;
}

}  // namespace detail

/// SMOTE for tabular data: each synthetic row is seed + lambda * (neighbor -
/// seed) with lambda uniform in [0,1] and the neighbor drawn among the seed's
/// k nearest rows (Euclidean on z-scored features, original-table scaling).
/// Non-feature float columns (the regression target included) interpolate
/// with the same lambda; int64, category and date columns copy from the seed
/// row. Appends the provenance column.
inline table smote_augment(const table& t, const std::vector<std::string>& feature_cols,
                           size_t k, size_t n_new, rng& r) {
    if (t.n_rows() < 2) fail(errc::too_few_rows, "smote needs at least 2 rows");
    if (k < 1 || k > t.n_rows() - 1)
        fail(errc::k_too_large, "smote needs 1 <= k <= rows-1 (k=" + std::to_string(k) +
                                    ", rows=" + std::to_string(t.n_rows()) + ")");
    if (feature_cols.empty()) fail(errc::non_numeric_feature, "smote needs feature columns");
    for (const auto& name : feature_cols)
        if (t.col(name).type != dtype::float64)
            fail(errc::non_numeric_feature, "smote feature '" + name + "' is not float64");

    table out = detail::ensure_provenance(t);
    if (n_new == 0) return out;

    std::vector<std::vector<double>> feats;
    feats.reserve(feature_cols.size());
    for (const auto& name : feature_cols) feats.push_back(t.floats(name));
    const detail::zscale z = detail::fit_zscale(t, feature_cols);

    table new_rows = out.take({});  // empty, same schema
    std::vector<std::vector<size_t>> nn_cache(t.n_rows());
    for (size_t row = 0; row < n_new; ++row) {
        const size_t seed = r.uniform_index(t.n_rows());
        auto& nns = nn_cache[seed];
        if (nns.empty()) nns = detail::nearest_neighbors(feats, z, seed, k);
        const size_t nb = nns[r.uniform_index(k)];
        const double lambda = r.uniform();

        for (column& c : new_rows.columns_mut()) {
            const column& src = out.col(c.name);
            if (c.type == dtype::float64) {
                const auto& sv = std::get<std::vector<double>>(src.data);
                std::get<std::vector<double>>(c.data).push_back(sv[seed] +
                                                                lambda * (sv[nb] - sv[seed]));
            } else if (c.type == dtype::int64) {
                const auto& sv = std::get<std::vector<int64_t>>(src.data);
                std::get<std::vector<int64_t>>(c.data).push_back(
                    c.name == synthetic_col ? int64_t{1} : sv[seed]);
            } else if (c.type == dtype::category) {
                const auto& sv = std::get<std::vector<std::string>>(src.data);
                std::get<std::vector<std::string>>(c.data).push_back(sv[seed]);
            } else {
                const auto& sv = std::get<std::vector<date>>(src.data);
                std::get<std::vector<date>>(c.data).push_back(sv[seed]);
            }
        }
    }
    out.append_rows(new_rows);
    return out;
}

/// New rows are uniformly resampled originals plus independent normal(0,
/// sigma) noise on each listed float column. Sigmas may cover only float
/// columns.
inline table jitter_augment(const table& t, const std::map<std::string, double>& sigmas,
                            size_t n_new, rng& r) {
    if (t.n_rows() == 0) fail(errc::too_few_rows, "jitter needs at least 1 row");
    for (const auto& [name, sigma] : sigmas) {
        if (t.col(name).type != dtype::float64)
            fail(errc::non_numeric_column, "jitter sigma on non-float column '" + name + "'");
        if (sigma < 0) fail(errc::invalid_spec, "jitter sigma must be >= 0");
    }

    table out = detail::ensure_provenance(t);
    table new_rows = out.take({});
    for (size_t row = 0; row < n_new; ++row) {
        const size_t src_row = r.uniform_index(t.n_rows());
        for (column& c : new_rows.columns_mut()) {
            const column& src = out.col(c.name);
            if (c.type == dtype::float64) {
                double v = std::get<std::vector<double>>(src.data)[src_row];
                auto it = sigmas.find(c.name);
                if (it != sigmas.end() && it->second > 0) v += r.normal(0.0, it->second);
                std::get<std::vector<double>>(c.data).push_back(v);
            } else if (c.type == dtype::int64) {
                std::get<std::vector<int64_t>>(c.data).push_back(
                    c.name == synthetic_col
                        ? int64_t{1}
                        : std::get<std::vector<int64_t>>(src.data)[src_row]);
            } else if (c.type == dtype::category) {
                std::get<std::vector<std::string>>(c.data).push_back(
                    std::get<std::vector<std::string>>(src.data)[src_row]);
            } else {
                std::get<std::vector<date>>(c.data).push_back(
                    std::get<std::vector<date>>(src.data)[src_row]);
            }
        }
    }
    out.append_rows(new_rows);
    return out;
}

/// Ordinary-least-squares extrapolation along an index column (numeric or
/// date). Each float column is fitted against the index; `horizon` new rows
/// are emitted at median-gap steps past the max index, with residuals
/// bootstrapped from the fit. int64, category and date columns copy from the
/// row holding the max index.
inline table extrapolate_augment(const table& t, const std::string& index_col, size_t horizon,
                                 rng& r) {
    const column& idx_col = t.col(index_col);
    std::vector<double> x;
    if (idx_col.type == dtype::float64 || idx_col.type == dtype::int64) {
        x = t.numeric(index_col);
    } else if (idx_col.type == dtype::date) {
        for (const date& d : t.dates(index_col))
            x.push_back(static_cast<double>(to_epoch_days(d)));
    } else {
        fail(errc::degenerate_index, "index column '" + index_col + "' must be numeric or date");
    }

    std::vector<double> distinct = x;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3)
        fail(errc::degenerate_index, "index column needs >= 3 distinct values");

    std::vector<double> gaps;
    for (size_t i = 1; i < distinct.size(); ++i) gaps.push_back(distinct[i] - distinct[i - 1]);
    double step = quantile(gaps, 0.5);
    if (idx_col.type != dtype::float64) step = std::max(1.0, std::floor(step + 0.5));

    struct fit {
        double intercept, slope;
        std::vector<double> residuals;
    };
    const double x_mean = mean(x);
    double x_var = 0.0;
    for (double v : x) x_var += (v - x_mean) * (v - x_mean);

    std::map<std::string, fit> fits;
    for (const column& c : t.columns()) {
        if (c.type != dtype::float64 || c.name == index_col) continue;
        const auto& y = std::get<std::vector<double>>(c.data);
        const double y_mean = mean(y);
        double cov = 0.0;
        for (size_t i = 0; i < y.size(); ++i) cov += (x[i] - x_mean) * (y[i] - y_mean);
        fit f;
        f.slope = cov / x_var;
        f.intercept = y_mean - f.slope * x_mean;
        for (size_t i = 0; i < y.size(); ++i)
            f.residuals.push_back(y[i] - (f.intercept + f.slope * x[i]));
        fits.emplace(c.name, std::move(f));
    }

    // source row for copied columns: the one holding the max index
    size_t last_row = 0;
    for (size_t i = 1; i < x.size(); ++i)
        if (x[i] >= x[last_row]) last_row = i;
    const double x_max = x[last_row];

    table out = detail::ensure_provenance(t);
    table new_rows = out.take({});
    for (size_t h = 1; h <= horizon; ++h) {
        const double xi = x_max + step * static_cast<double>(h);
        for (column& c : new_rows.columns_mut()) {
            const column& src = out.col(c.name);
            if (c.name == index_col) {
                if (c.type == dtype::float64)
                    std::get<std::vector<double>>(c.data).push_back(xi);
                else if (c.type == dtype::int64)
                    std::get<std::vector<int64_t>>(c.data).push_back(
                        static_cast<int64_t>(std::llround(xi)));
                else
                    std::get<std::vector<date>>(c.data).push_back(
                        from_epoch_days(static_cast<int64_t>(std::llround(xi))));
                continue;
            }
            if (c.type == dtype::float64) {
                const fit& f = fits.at(c.name);
                const double res = f.residuals[r.uniform_index(f.residuals.size())];
                std::get<std::vector<double>>(c.data).push_back(f.intercept + f.slope * xi + res);
            } else if (c.type == dtype::int64) {
                std::get<std::vector<int64_t>>(c.data).push_back(
                    c.name == synthetic_col
                        ? int64_t{1}
                        : std::get<std::vector<int64_t>>(src.data)[last_row]);
            } else if (c.type == dtype::category) {
                std::get<std::vector<std::string>>(c.data).push_back(
                    std::get<std::vector<std::string>>(src.data)[last_row]);
            } else {
                std::get<std::vector<date>>(c.data).push_back(
                    std::get<std::vector<date>>(src.data)[last_row]);
            }
        }
    }
    out.append_rows(new_rows);
    return out;
}

// ---------------------------------------------------------------------------
// Stratum-targeted oversampling, the §-style "boost the thin slice" move:
// the method runs only on rows matching the stratum predicate, and the new
// rows are appended to the full table.
// ---------------------------------------------------------------------------

struct augment_plan {
    enum class method_kind { smote, jitter, extrapolate };
    method_kind method = method_kind::smote;

    // smote
    std::vector<std::string> feature_cols;
    size_t k = 5;
    // jitter
    std::map<std::string, double> sigmas;
    // extrapolate
    std::string index_col;

    /// Rows the method may learn from; empty matches the whole table.
    predicate stratum;

    /// Exactly one of these decides how many rows get added. growth_pct is
    /// relative to the whole input table and rounds half-up.
    std::optional<size_t> n_new;
    std::optional<double> growth_pct;

    size_t resolve_n_new(size_t table_rows) const {
        if (n_new && growth_pct) fail(errc::invalid_spec, "give n_new or growth_pct, not both");
        if (n_new) return *n_new;
        if (growth_pct) {
            if (*growth_pct < 0) fail(errc::invalid_spec, "growth_pct must be >= 0");
            return static_cast<size_t>(
                std::floor(*growth_pct / 100.0 * static_cast<double>(table_rows) + 0.5));
        }
        fail(errc::invalid_spec, "augment plan needs n_new or growth_pct");
    }
};

/// Applies plan.method within the stratum rows only; output = original table
/// plus exactly the resolved number of new rows.
inline table stratified_oversample(const table& t, const augment_plan& plan, rng& r) {
    const size_t add = plan.resolve_n_new(t.n_rows());
    const std::vector<size_t> rows = matching_rows(t, plan.stratum);
    if (!plan.stratum.empty() && rows.empty())
        fail(errc::empty_stratum, "stratum predicate matches no rows");

    const table stratum = t.take(rows);
    table grown;
    switch (plan.method) {
        case augment_plan::method_kind::smote: {
            if (stratum.n_rows() < 2)
                fail(errc::too_few_rows, "smote stratum needs at least 2 rows");
            const size_t k = std::min(plan.k, stratum.n_rows() - 1);
            grown = smote_augment(stratum, plan.feature_cols, k, add, r);
            break;
        }
        case augment_plan::method_kind::jitter:
            grown = jitter_augment(stratum, plan.sigmas, add, r);
            break;
        case augment_plan::method_kind::extrapolate:
            grown = extrapolate_augment(stratum, plan.index_col, add, r);
            break;
    }

    // keep the originals bit-exact; append only the freshly generated tail
    table out = detail::ensure_provenance(t);
    std::vector<size_t> tail(add);
    std::iota(tail.begin(), tail.end(), stratum.n_rows());
    out.append_rows(grown.take(tail));
    return out;
}

}  // namespace sagda
