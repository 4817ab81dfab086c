// classic.hpp
//
// Hill tail index, Weissman high quantiles, Peng's mean estimator and the
// asymptotically optimal Hill sample fraction.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

#include "dist.hpp"
#include "empirical.hpp"
#include "error.hpp"

namespace tailmean {

struct PengEstimate {
    double mean_hat = 0.0;
    double hill_alpha = 0.0;
    std::size_t k = 0;
    /// sqrt(k/n) X(n-k,n) sigma(alpha_H) / sqrt(n); empty when alpha_H is
    /// outside (1,2), where the asymptotic variance is not defined.
    std::optional<double> std_err;
};

inline double hill(const TailView &tv) {
    if (!(tv.s1 > 0.0)) throw degenerate_error("Hill estimator undefined: top order statistics are all tied");
    return 1.0 / tv.s1;
}

inline double hill(const SortedSample &sample, std::size_t k) { return hill(tail_view(sample, k)); }

/// (k/n)^(1/a) X(n-k,n) s^(-1/a), 0 < s <= k/n. At s = k/n the threshold
/// itself is returned.
inline double weissman_quantile(const SortedSample &sample, std::size_t k, double s) {
    const TailView tv = tail_view(sample, k);
    const double a = hill(tv);
    const double frac = static_cast<double>(k) / static_cast<double>(tv.n);
    if (!(s > 0.0) || s > frac) throw domain_error("weissman_quantile: s must lie in (0, k/n]");
    if (s == frac) return tv.threshold;
    return std::pow(frac / s, 1.0 / a) * tv.threshold;
}

/// sigma^2(a) = a / ((1-a)^4 (2-a)), the asymptotic variance of Peng's
/// estimator under its self-normalisation.
inline double peng_variance(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw domain_error("peng_variance: alpha must lie in (1,2)");
    const double q = (1.0 - alpha) * (1.0 - alpha);
    return alpha / (q * q * (2.0 - alpha));
}

inline PengEstimate peng_mean(const SortedSample &sample, std::size_t k) {
    const TailView tv = tail_view(sample, k);
    const double a = hill(tv);
    if (!(a > 1.0)) throw infinite_mean_error("Peng estimator undefined: Hill estimate <= 1 (infinite mean)");
    const double n = static_cast<double>(tv.n);
    const double frac = static_cast<double>(k) / n;

    PengEstimate est;
    est.hill_alpha = a;
    est.k = k;
    est.mean_hat = frac * (a / (a - 1.0)) * tv.threshold + lower_tail_mean(sample, k);
    if (a < 2.0) est.std_err = std::sqrt(frac) * tv.threshold * std::sqrt(peng_variance(a)) / std::sqrt(n);
    return est;
}

/// Sample fraction minimising the asymptotic MSE of the Hill estimator,
/// rounded and clamped into [1, n-1].
inline std::size_t k_opt(const HallConstants &hc, std::size_t n) {
    hc.validate();
    if (n < 2) throw size_error("k_opt: n must be at least 2");
    const double a = hc.alpha;
    const double b = hc.beta;
    const double coef =
        0.5 * a * b * b * std::pow(b - a, -3.0) * std::pow(hc.d, -2.0) * std::pow(hc.c, 2.0 * b / a);
    const double k = std::pow(coef, a / (2.0 * b - a)) *
                     std::pow(static_cast<double>(n), (2.0 * b - 2.0 * a) / (2.0 * b - a));
    const double r = std::round(k);
    return static_cast<std::size_t>(std::clamp(r, 1.0, static_cast<double>(n - 1)));
}

} // namespace tailmean
