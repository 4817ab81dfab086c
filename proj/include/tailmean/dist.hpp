// dist.hpp
//
// Parametric heavy-tailed laws used as simulation ground truth.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "empirical.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "special.hpp"

namespace tailmean {

enum class Family { Frechet, Pareto };

inline std::string_view to_string(Family f) { return f == Family::Frechet ? "frechet" : "pareto"; }

inline Family parse_family(std::string_view name) {
    if (name == "frechet") return Family::Frechet;
    if (name == "pareto") return Family::Pareto;
    throw domain_error("unknown distribution family '" + std::string(name) + "'");
}

struct HeavyTailModel {
    Family family = Family::Frechet;
    double alpha = 1.5;

    HeavyTailModel() = default;
    HeavyTailModel(Family f, double a) : family(f), alpha(a) {
        if (!(a > 0.0) || !std::isfinite(a)) throw domain_error("tail index alpha must be positive");
    }
};

/// Constants of the expansion 1 - F(x) = c x^-alpha + d x^-beta + o(x^-beta).
struct HallConstants {
    double alpha = 0.0;
    double beta = 0.0;
    double c = 0.0;
    double d = 0.0;
    std::optional<double> rho;

    void validate() const {
        if (!(alpha > 0.0 && beta > alpha)) throw domain_error("Hall constants require beta > alpha > 0");
        if (!(c > 0.0)) throw domain_error("Hall constants require c > 0");
        if (d == 0.0) throw domain_error("Hall constants require d != 0");
    }
};

inline double model_cdf(const HeavyTailModel &m, double x) {
    switch (m.family) {
    case Family::Frechet:
        return x <= 0.0 ? 0.0 : std::exp(-std::pow(x, -m.alpha));
    case Family::Pareto:
        return x <= 1.0 ? 0.0 : -std::expm1(-m.alpha * std::log(x));
    }
    return 0.0;
}

inline double model_quantile(const HeavyTailModel &m, double p) {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("model_quantile: p must lie in (0,1)");
    switch (m.family) {
    case Family::Frechet:
        return std::pow(-std::log(p), -1.0 / m.alpha);
    case Family::Pareto:
        return std::pow(1.0 - p, -1.0 / m.alpha);
    }
    return 0.0;
}

/// Inverse-transform draws from the counter stream keyed by `seed`; draw i
/// uses the i-th uniform of that stream.
inline SortedSample model_sample(const HeavyTailModel &m, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw size_error("model_sample: n must be at least 1");
    const std::uint64_t key = rng::derive_key(seed, {});
    std::vector<double> draws(n);
    for (std::size_t i = 0; i < n; ++i) draws[i] = model_quantile(m, rng::uniform(key, i));
    return SortedSample(std::move(draws));
}

inline double model_true_mean(const HeavyTailModel &m) {
    if (!(m.alpha > 1.0)) throw infinite_mean_error("model mean is infinite for alpha <= 1");
    switch (m.family) {
    case Family::Frechet:
        return special::lanczos_gamma(1.0 - 1.0 / m.alpha);
    case Family::Pareto:
        return m.alpha / (m.alpha - 1.0);
    }
    return 0.0;
}

/// Frechet: 1 - exp(-x^-a) = x^-a - x^-2a / 2 + x^-3a / 6 - ..., so
/// beta = 2a, c = 1, d = -1/2 and the third-order rate is 3a.
inline HallConstants model_hall_constants(const HeavyTailModel &m) {
    switch (m.family) {
    case Family::Frechet:
        return HallConstants{m.alpha, 2.0 * m.alpha, 1.0, -0.5, 3.0 * m.alpha};
    case Family::Pareto:
        throw degenerate_error("Pareto law is an exact power law: no second-order term (d = 0)");
    }
    throw degenerate_error("unknown family");
}

} // namespace tailmean
