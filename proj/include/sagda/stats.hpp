#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "sagda/error.hpp"

namespace sagda {

inline double mean(std::span<const double> v) {
    if (v.empty()) fail(errc::empty_sample, "mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample variance (n-1 denominator). Returns 0 for a single observation.
inline double sample_variance(std::span<const double> v) {
    if (v.empty()) fail(errc::empty_sample, "variance of empty sample");
    if (v.size() == 1) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double sample_stddev(std::span<const double> v) { return std::sqrt(sample_variance(v)); }

/// Linear-interpolation quantile between order statistics (the "type 7"
/// convention), fixed project-wide so that "quartile" always means the same
/// number everywhere.
inline double quantile(std::vector<double> values, double p) {
    if (values.empty()) fail(errc::empty_sample, "quantile of empty sample");
    if (p < 0.0 || p > 1.0) fail(errc::invalid_spec, "quantile p outside [0,1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - std::floor(h)) * (values[lo + 1] - values[lo]);
}

// ---------------------------------------------------------------------------
// Small dense symmetric linear algebra. Matrices are row-major vectors of
// size n*n. Dimensions here are tiny (features, not observations), so clarity
// beats blocking.
// ---------------------------------------------------------------------------

/// In-place Cholesky factorization A = L L^T (lower triangle). Returns false
/// if A is not positive definite within tolerance.
inline bool cholesky(std::vector<double>& a, size_t n) {
    double max_diag = 0.0;
    for (size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a[i * n + i]));
    const double tol = 1e-12 * std::max(max_diag, 1.0);
    for (size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (d <= tol) return false;
        const double l = std::sqrt(d);
        a[j * n + j] = l;
        for (size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / l;
        }
        for (size_t k = j + 1; k < n; ++k) a[j * n + k] = 0.0;
    }
    return true;
}

/// Solves L L^T x = b given the factor from cholesky(). b is overwritten.
inline void cholesky_solve(const std::vector<double>& l, size_t n, std::vector<double>& b) {
    for (size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
        b[i] = s / l[i * n + i];
    }
    for (size_t i = n; i-- > 0;) {
        double s = b[i];
        for (size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * b[k];
        b[i] = s / l[i * n + i];
    }
}

struct eigen_result {
    std::vector<double> values;   // descending
    std::vector<double> vectors;  // row-major, row i = eigenvector of values[i]
};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Deterministic and dependency-free; fine for the dozens-of-features scale
/// this project works at.
inline eigen_result jacobi_eigen(std::vector<double> a, size_t n) {
    std::vector<double> v(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-26) break;

        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t x, size_t y) { return a[x * n + x] > a[y * n + y]; });

    eigen_result out;
    out.values.resize(n);
    out.vectors.resize(n * n);
    for (size_t r = 0; r < n; ++r) {
        const size_t src = order[r];
        out.values[r] = a[src * n + src];
        for (size_t k = 0; k < n; ++k) out.vectors[r * n + k] = v[k * n + src];
    }
    return out;
}

/// Minimum-norm least-squares solve of (A^T A) x = A^T b through the
/// eigendecomposition of the Gram matrix, dropping near-null directions.
/// Collinear design columns (e.g. duplicated base learners) get their weight
/// split evenly instead of blowing up.
inline std::vector<double> pinv_least_squares(const std::vector<double>& gram, size_t n,
                                              std::vector<double> rhs) {
    eigen_result eig = jacobi_eigen(gram, n);
    const double cutoff = 1e-10 * std::max(eig.values.empty() ? 0.0 : std::abs(eig.values[0]), 1.0);
    std::vector<double> x(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        if (eig.values[i] <= cutoff) continue;
        double proj = 0.0;
        for (size_t k = 0; k < n; ++k) proj += eig.vectors[i * n + k] * rhs[k];
        proj /= eig.values[i];
        for (size_t k = 0; k < n; ++k) x[k] += proj * eig.vectors[i * n + k];
    }
    return x;
}

// ---------------------------------------------------------------------------
// Incomplete gamma and the chi-square quantile built on it.
// ---------------------------------------------------------------------------

namespace detail {

inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
    // Lentz's continued fraction for Q(a, x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) fail(errc::invalid_spec, "gamma_p domain");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_contfrac(a, x);
}

/// Chi-square CDF with k degrees of freedom.
inline double chi2_cdf(double x, double k) { return gamma_p(k / 2.0, x / 2.0); }

/// Chi-square quantile via bracketed bisection on the CDF. Monotone, so the
/// bisection is unconditionally safe; 200 halvings reach ~1e-12 relative.
inline double chi2_quantile(double p, double k) {
    if (p < 0.0 || p >= 1.0) fail(errc::invalid_spec, "chi2 quantile p outside [0,1)");
    if (p == 0.0) return 0.0;
    double lo = 0.0, hi = k + 10.0;
    while (chi2_cdf(hi, k) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_cdf(mid, k) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// FNV-1a 64-bit hash; used for stable config digests.
inline uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

}  // namespace sagda
