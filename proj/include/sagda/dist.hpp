#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "sagda/error.hpp"
#include "sagda/rng.hpp"
#include "sagda/stats.hpp"

namespace sagda {

/// Gamma(shape, scale) by Marsaglia-Tsang squeeze; shape < 1 is boosted
/// through the Gamma(shape+1) * U^(1/shape) identity. Rejection loops consume
/// a variable number of draws, so callers that need draw-count stability must
/// give each sampler its own split stream.
inline double draw_gamma(double shape, double scale, rng& r) {
    if (shape <= 0.0 || scale <= 0.0) fail(errc::invalid_spec, "gamma needs shape>0, scale>0");
    if (shape < 1.0) {
        const double u = 1.0 - r.uniform();  // (0,1]
        return draw_gamma(shape + 1.0, scale, r) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = r.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - r.uniform();  // (0,1]
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v * scale;
    }
}

inline double draw_beta(double alpha, double beta, rng& r) {
    if (alpha <= 0.0 || beta <= 0.0) fail(errc::invalid_spec, "beta needs alpha>0, beta>0");
    const double x = draw_gamma(alpha, 1.0, r);
    const double y = draw_gamma(beta, 1.0, r);
    return x / (x + y);
}

inline double draw_lognormal(double mu_log, double sigma_log, rng& r) {
    return std::exp(r.normal(mu_log, sigma_log));
}

/// One multivariate-normal draw given mean and the lower Cholesky factor of
/// the covariance (row-major dim x dim).
inline std::vector<double> draw_mvn(const std::vector<double>& mean,
                                    const std::vector<double>& chol_lower, size_t dim, rng& r) {
    std::vector<double> z(dim);
    for (double& v : z) v = r.normal();
    std::vector<double> out(dim);
    for (size_t i = 0; i < dim; ++i) {
        double s = mean[i];
        for (size_t k = 0; k <= i; ++k) s += chol_lower[i * dim + k] * z[k];
        out[i] = s;
    }
    return out;
}

}  // namespace sagda
