#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sagda/error.hpp"
#include "sagda/stats.hpp"
#include "sagda/table.hpp"

namespace sagda {

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

struct ks_result {
    double d = 0.0;  // sup |ECDF_a - ECDF_b|, exact
    double p = 1.0;  // asymptotic Kolmogorov tail, clipped to [0,1]
};

/// D is computed exactly by walking the merged order statistics. The p-value
/// uses the asymptotic series 2 * sum_j (-1)^(j-1) exp(-2 j^2 n_e D^2) with
/// effective size n_e = |a||b|/(|a|+|b|); exact enumeration is pointless at
/// the sample sizes this pipeline works with.
inline ks_result ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) fail(errc::empty_sample, "ks_two_sample needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());

    double d = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    d = std::max(d, std::abs(1.0 - static_cast<double>(j) / nb));
    d = std::max(d, std::abs(static_cast<double>(i) / na - 1.0));

    const double ne = na * nb / (na + nb);
    const double t = 2.0 * ne * d * d;
    double p;
    if (t < 1e-12) {
        p = 1.0;
    } else {
        double sum = 0.0;
        for (int k = 1; k <= 1000; ++k) {
            const double term = std::exp(-t * static_cast<double>(k) * static_cast<double>(k));
            sum += (k % 2 == 1) ? term : -term;
            if (term < 1e-14) break;
        }
        p = 2.0 * sum;
    }
    return {d, std::clamp(p, 0.0, 1.0)};
}

// ---------------------------------------------------------------------------
// Histogram overlap coefficient
// ---------------------------------------------------------------------------

/// Shared equal-width binning over [min(a u b), max(a u b)]; the result is
/// sum_i min(p_i, q_i) over the two normalized histograms.
inline double overlap_coefficient(std::span<const double> a, std::span<const double> b,
                                  size_t bins) {
    if (a.empty() || b.empty()) fail(errc::empty_sample, "overlap needs non-empty samples");
    if (bins < 1) fail(errc::invalid_spec, "overlap needs bins >= 1");
    double lo = a[0], hi = a[0];
    for (double x : a) lo = std::min(lo, x), hi = std::max(hi, x);
    for (double x : b) lo = std::min(lo, x), hi = std::max(hi, x);
    const double width = hi - lo;

    auto histogram = [&](std::span<const double> v) {
        std::vector<double> h(bins, 0.0);
        for (double x : v) {
            size_t idx = 0;
            if (width > 0)
                idx = std::min(static_cast<size_t>((x - lo) / width * static_cast<double>(bins)),
                               bins - 1);
            h[idx] += 1.0;
        }
        for (double& c : h) c /= static_cast<double>(v.size());
        return h;
    };

    const auto pa = histogram(a);
    const auto pb = histogram(b);
    double overlap = 0.0;
    for (size_t i = 0; i < bins; ++i) overlap += std::min(pa[i], pb[i]);
    return overlap;
}

// ---------------------------------------------------------------------------
// PCA on z-scored features
// ---------------------------------------------------------------------------

struct pca_model {
    std::vector<std::string> feature_cols;
    std::vector<double> mean;     // per feature, from the fit table
    std::vector<double> stddev;   // ditto
    size_t n_components = 0;
    std::vector<double> components;  // n_components x n_features, row-major
    std::vector<double> explained_variance_ratios;  // all features, descending

    /// Projects one observation (raw feature values) onto the components.
    std::vector<double> project(std::span<const double> row) const {
        const size_t nf = feature_cols.size();
        std::vector<double> out(n_components, 0.0);
        for (size_t c = 0; c < n_components; ++c)
            for (size_t f = 0; f < nf; ++f)
                out[c] += components[c * nf + f] * (row[f] - mean[f]) / stddev[f];
        return out;
    }

    std::vector<std::vector<double>> project_table(const table& t) const {
        std::vector<const std::vector<double>*> cols;
        for (const auto& name : feature_cols) cols.push_back(&t.floats(name));
        std::vector<std::vector<double>> out;
        out.reserve(t.n_rows());
        std::vector<double> row(feature_cols.size());
        for (size_t i = 0; i < t.n_rows(); ++i) {
            for (size_t f = 0; f < cols.size(); ++f) row[f] = (*cols[f])[i];
            out.push_back(project(row));
        }
        return out;
    }
};

/// Eigendecomposition of the sample correlation matrix (features z-scored
/// first). Components come back sorted by descending eigenvalue with the
/// sign fixed so each component's largest-magnitude loading is positive.
inline pca_model pca_fit(const table& t, const std::vector<std::string>& feature_cols,
                         size_t n_components) {
    const size_t nf = feature_cols.size();
    if (nf == 0) fail(errc::invalid_spec, "pca needs at least one feature");
    if (n_components < 1 || n_components > nf)
        fail(errc::invalid_spec, "pca needs 1 <= n_components <= features");
    if (t.n_rows() < 2) fail(errc::too_few_rows, "pca needs at least 2 rows");

    pca_model m;
    m.feature_cols = feature_cols;
    m.n_components = n_components;
    std::vector<std::vector<double>> z(nf);
    for (size_t f = 0; f < nf; ++f) {
        const auto& v = t.floats(feature_cols[f]);
        const double mu = mean(v);
        const double sd = sample_stddev(v);
        if (sd == 0.0)
            fail(errc::zero_variance, "pca feature '" + feature_cols[f] + "' is constant");
        m.mean.push_back(mu);
        m.stddev.push_back(sd);
        z[f].reserve(v.size());
        for (double x : v) z[f].push_back((x - mu) / sd);
    }

    const double denom = static_cast<double>(t.n_rows() - 1);
    std::vector<double> cov(nf * nf, 0.0);
    for (size_t i = 0; i < nf; ++i) {
        for (size_t j = i; j < nf; ++j) {
            double s = 0.0;
            for (size_t r = 0; r < t.n_rows(); ++r) s += z[i][r] * z[j][r];
            cov[i * nf + j] = cov[j * nf + i] = s / denom;
        }
    }

    eigen_result eig = jacobi_eigen(cov, nf);
    double trace = 0.0;
    for (double v : eig.values) trace += v;
    for (double v : eig.values)
        m.explained_variance_ratios.push_back(std::max(0.0, v) / trace);

    m.components.resize(n_components * nf);
    for (size_t c = 0; c < n_components; ++c) {
        size_t arg = 0;
        for (size_t f = 1; f < nf; ++f)
            if (std::abs(eig.vectors[c * nf + f]) > std::abs(eig.vectors[c * nf + arg])) arg = f;
        const double sign = eig.vectors[c * nf + arg] < 0 ? -1.0 : 1.0;
        for (size_t f = 0; f < nf; ++f) m.components[c * nf + f] = sign * eig.vectors[c * nf + f];
    }
    return m;
}

// ---------------------------------------------------------------------------
// Mahalanobis overlap in PC space
// ---------------------------------------------------------------------------

/// Fits PCA on the real table, projects both tables, and reports the
/// fraction of synthetic points whose squared Mahalanobis distance to the
/// real projection cloud falls inside the chi-square(coverage, n_pc)
/// ellipsoid. This is the containment reading of "overlap in PCA space".
inline double mahalanobis_overlap(const table& real, const table& synth,
                                  const std::vector<std::string>& feature_cols, size_t n_pc = 2,
                                  double coverage = 0.997) {
    if (synth.n_rows() == 0) fail(errc::empty_sample, "synthetic table is empty");
    if (real.n_rows() <= n_pc) fail(errc::too_few_rows, "need real rows > n_pc");
    pca_model pca = pca_fit(real, feature_cols, n_pc);
    const auto pr = pca.project_table(real);
    const auto ps = pca.project_table(synth);

    std::vector<double> mu(n_pc, 0.0);
    for (const auto& row : pr)
        for (size_t c = 0; c < n_pc; ++c) mu[c] += row[c];
    for (double& v : mu) v /= static_cast<double>(pr.size());

    std::vector<double> cov(n_pc * n_pc, 0.0);
    for (const auto& row : pr)
        for (size_t i = 0; i < n_pc; ++i)
            for (size_t j = 0; j < n_pc; ++j) cov[i * n_pc + j] += (row[i] - mu[i]) * (row[j] - mu[j]);
    for (double& v : cov) v /= static_cast<double>(pr.size() - 1);

    std::vector<double> chol = cov;
    if (!cholesky(chol, n_pc))
        fail(errc::singular_covariance, "real projection covariance is singular");

    const double threshold = chi2_quantile(coverage, static_cast<double>(n_pc));
    size_t inside = 0;
    std::vector<double> diff(n_pc);
    for (const auto& row : ps) {
        for (size_t c = 0; c < n_pc; ++c) diff[c] = row[c] - mu[c];
        std::vector<double> solved = diff;
        cholesky_solve(chol, n_pc, solved);
        double d2 = 0.0;
        for (size_t c = 0; c < n_pc; ++c) d2 += diff[c] * solved[c];
        if (d2 <= threshold) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(ps.size());
}

// ---------------------------------------------------------------------------
// Agronomic plausibility rules
// ---------------------------------------------------------------------------

struct plausibility_rule {
    /// Closed interval on one column...
    std::string column;
    std::optional<double> lo;
    std::optional<double> hi;
    /// ...or a monotone relation against another column (e.g. tmin <= tmax).
    std::optional<std::string> relation_col;  // when set: column <op> relation_col
    cmp_op relation_op = cmp_op::le;

    std::string describe() const {
        if (relation_col) {
            const char* ops[] = {"==", "!=", "<", "<=", ">", ">="};
            return column + " " + ops[static_cast<int>(relation_op)] + " " + *relation_col;
        }
        std::string s = column + " in [";
        s += lo ? std::to_string(*lo) : std::string("-inf");
        s += ", ";
        s += hi ? std::to_string(*hi) : std::string("+inf");
        return s + "]";
    }
};

struct rule_outcome {
    std::string rule;
    size_t pass = 0;
    size_t fail = 0;
    std::vector<size_t> offending_rows;  // at most 5
};

inline std::vector<rule_outcome> check_plausibility(const table& t,
                                                    const std::vector<plausibility_rule>& rules) {
    std::vector<rule_outcome> out;
    out.reserve(rules.size());
    for (const auto& rule : rules) {
        if (rule.lo && rule.hi && *rule.lo > *rule.hi)
            fail(errc::invalid_spec, "rule interval needs lo <= hi");
        const auto lhs = t.numeric(rule.column);
        rule_outcome res;
        res.rule = rule.describe();
        if (rule.relation_col) {
            const auto rhs = t.numeric(*rule.relation_col);
            for (size_t i = 0; i < lhs.size(); ++i) {
                if (detail::compare(lhs[i], rule.relation_op, rhs[i])) {
                    ++res.pass;
                } else {
                    ++res.fail;
                    if (res.offending_rows.size() < 5) res.offending_rows.push_back(i);
                }
            }
        } else {
            for (size_t i = 0; i < lhs.size(); ++i) {
                const bool ok = (!rule.lo || lhs[i] >= *rule.lo) && (!rule.hi || lhs[i] <= *rule.hi);
                if (ok) {
                    ++res.pass;
                } else {
                    ++res.fail;
                    if (res.offending_rows.size() < 5) res.offending_rows.push_back(i);
                }
            }
        }
        out.push_back(std::move(res));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Aggregate report
// ---------------------------------------------------------------------------

struct column_comparison {
    std::string column;
    ks_result ks;
    double overlap = 0.0;
};

struct validation_report {
    std::vector<column_comparison> columns;
    std::vector<double> pca_ratios;        // real table, all components
    double mahalanobis = 0.0;              // containment fraction
    std::vector<rule_outcome> plausibility;
};

/// Compares every shared numeric column, fits PCA on the real side, and runs
/// the plausibility rules against the synthetic table.
inline validation_report validate_tables(const table& real, const table& synth,
                                         size_t bins = 20, size_t n_pc = 2,
                                         double coverage = 0.997,
                                         const std::vector<plausibility_rule>& rules = {}) {
    validation_report report;
    std::vector<std::string> shared;
    for (const column& c : real.columns()) {
        if (c.type != dtype::float64 && c.type != dtype::int64) continue;
        if (c.name == "synthetic" || c.name == "field_id") continue;
        if (!synth.has_column(c.name)) continue;
        shared.push_back(c.name);
    }
    for (const auto& name : shared) {
        column_comparison cc;
        cc.column = name;
        cc.ks = ks_two_sample(real.numeric(name), synth.numeric(name));
        cc.overlap = overlap_coefficient(real.numeric(name), synth.numeric(name), bins);
        report.columns.push_back(std::move(cc));
    }
    // PCA and Mahalanobis need non-constant float features on both sides
    std::vector<std::string> pca_features;
    for (const auto& name : shared) {
        if (real.col(name).type != dtype::float64) continue;
        if (sample_stddev(real.floats(name)) == 0.0) continue;
        pca_features.push_back(name);
    }
    if (pca_features.size() >= 2 && real.n_rows() > n_pc) {
        const size_t pcs = std::min(n_pc, pca_features.size());
        report.pca_ratios = pca_fit(real, pca_features, pcs).explained_variance_ratios;
        report.mahalanobis = mahalanobis_overlap(real, synth, pca_features, pcs, coverage);
    }
    report.plausibility = check_plausibility(synth, rules);
    return report;
}

inline nlohmann::json report_to_json(const validation_report& r) {
    nlohmann::json j;
    j["columns"] = nlohmann::json::array();
    for (const auto& c : r.columns)
        j["columns"].push_back({{"column", c.column},
                                {"ks_d", c.ks.d},
                                {"ks_p", c.ks.p},
                                {"overlap", c.overlap}});
    j["pca_explained_variance_ratios"] = r.pca_ratios;
    j["mahalanobis_overlap"] = r.mahalanobis;
    j["plausibility"] = nlohmann::json::array();
    for (const auto& p : r.plausibility)
        j["plausibility"].push_back({{"rule", p.rule},
                                     {"pass", p.pass},
                                     {"fail", p.fail},
                                     {"offending_rows", p.offending_rows}});
    return j;
}

/// Plain-text summary for terminal output.
inline std::string render_report(const validation_report& r) {
    std::string out;
    char line[160];
    out += "column                     ks_D      ks_p   overlap\n";
    for (const auto& c : r.columns) {
        std::snprintf(line, sizeof(line), "%-24s %7.4f %9.4g %9.4f\n", c.column.c_str(), c.ks.d,
                      c.ks.p, c.overlap);
        out += line;
    }
    if (!r.pca_ratios.empty()) {
        out += "pca explained variance:";
        for (double v : r.pca_ratios) {
            std::snprintf(line, sizeof(line), " %.4f", v);
            out += line;
        }
        std::snprintf(line, sizeof(line), "\nmahalanobis overlap: %.4f\n", r.mahalanobis);
        out += line;
    }
    for (const auto& p : r.plausibility) {
        std::snprintf(line, sizeof(line), "rule %-28s pass %zu fail %zu\n", p.rule.c_str(), p.pass,
                      p.fail);
        out += line;
    }
    return out;
}

}  // namespace sagda
