// ksel.hpp
//
// Adaptive sample fraction: the Reiss-Thomas heuristic
//
//   k* = argmin_k (1/k) sum_{i<=k} i^theta |a(i) - median{a(1..k)}|
//
// driven by the CML tail-index estimates a(i).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "classic.hpp"
#include "cml.hpp"
#include "empirical.hpp"
#include "error.hpp"

namespace tailmean {

struct AlphaPathEntry {
    std::size_t i = 0;
    /// Empty when neither CML nor Hill produced a finite estimate.
    std::optional<double> alpha;
    /// True when the CML solve failed and Hill was used instead.
    bool fallback = false;
};

struct KSelection {
    std::size_t k_star = 0;
    double theta = 0.3;
    std::vector<std::pair<std::size_t, double>> objective_values;
    std::vector<AlphaPathEntry> alpha_path;
};

struct KRange {
    std::size_t k_min = 0;
    std::size_t k_max = 0;
};

/// max(10, ceil(0.02 n)) .. ceil(0.5 n), clipped into [2, n-1].
inline KRange default_k_range(std::size_t n) {
    if (n < 3) throw size_error("k selection needs at least three observations");
    const auto nn = static_cast<double>(n);
    std::size_t lo = std::max<std::size_t>(10, static_cast<std::size_t>(std::ceil(0.02 * nn)));
    std::size_t hi = static_cast<std::size_t>(std::ceil(0.5 * nn));
    hi = std::min(hi, n - 1);
    lo = std::clamp<std::size_t>(lo, 2, hi);
    return {lo, hi};
}

namespace ksel_detail {

inline double median_sorted(const std::vector<double> &v) {
    const std::size_t m = v.size();
    return (m % 2 == 1) ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

} // namespace ksel_detail

/// Objective values for k in [k_min, k_max] given the estimate path
/// a(1..k_max) (entry i-1 holds a(i)). Missing entries are left out of both
/// the median and the sum.
inline std::vector<std::pair<std::size_t, double>>
reiss_thomas_objective(const std::vector<AlphaPathEntry> &path, double theta, std::size_t k_min, std::size_t k_max) {
    if (k_max > path.size()) throw index_error("reiss_thomas_objective: path shorter than k_max");
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(k_max - k_min + 1);
    std::vector<double> sorted;
    sorted.reserve(k_max);
    std::vector<double> weight(k_max);
    for (std::size_t i = 1; i <= k_max; ++i) weight[i - 1] = std::pow(static_cast<double>(i), theta);

    for (std::size_t k = 1; k <= k_max; ++k) {
        if (const auto &a = path[k - 1].alpha) sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), *a), *a);
        if (k < k_min || sorted.empty()) continue;
        const double med = ksel_detail::median_sorted(sorted);
        double sum = 0.0;
        for (std::size_t i = 1; i <= k; ++i)
            if (const auto &a = path[i - 1].alpha) sum += weight[i - 1] * std::abs(*a - med);
        out.emplace_back(k, sum / static_cast<double>(k));
    }
    return out;
}

/// CML tail-index estimate at every fraction i = 1..k_max, with a Hill
/// fallback where the solver does not converge (always at i = 1).
inline std::vector<AlphaPathEntry> alpha_path(const SortedSample &sample, std::size_t k_max, const CmlOptions &opt = {}) {
    std::vector<AlphaPathEntry> path(k_max);
    for (std::size_t i = 1; i <= k_max; ++i) {
        AlphaPathEntry &e = path[i - 1];
        e.i = i;
        const TailView tv = tail_view(sample, i);
        if (!(tv.s1 > 0.0)) continue;
        if (i >= 2) {
            const CmlEstimate est = cml_fit(tv, opt);
            if (est.converged) {
                e.alpha = est.alpha_hat;
                continue;
            }
        }
        e.alpha = 1.0 / tv.s1;
        e.fallback = true;
    }
    return path;
}

inline KSelection select_k(std::vector<AlphaPathEntry> path, double theta, std::size_t k_min, std::size_t k_max) {
    auto objective = reiss_thomas_objective(path, theta, k_min, k_max);
    if (objective.empty()) throw numerical_error("Reiss-Thomas: no usable tail-index estimate in the search range");
    KSelection sel;
    sel.theta = theta;
    double best = std::numeric_limits<double>::infinity();
    for (const auto &[k, v] : objective) {
        if (v < best) {
            best = v;
            sel.k_star = k;
        }
    }
    sel.objective_values = std::move(objective);
    sel.alpha_path = std::move(path);
    return sel;
}

inline KSelection reiss_thomas(const SortedSample &sample, double theta, std::size_t k_min, std::size_t k_max,
                               const CmlOptions &opt = {}) {
    if (!(theta >= 0.0 && theta <= 0.5)) throw domain_error("Reiss-Thomas: theta must lie in [0, 0.5]");
    if (k_min < 2 || k_min > k_max || k_max >= sample.size())
        throw index_error("Reiss-Thomas: need 2 <= k_min <= k_max < n");
    return select_k(alpha_path(sample, k_max, opt), theta, k_min, k_max);
}

inline KSelection reiss_thomas(const SortedSample &sample, double theta = 0.3, const CmlOptions &opt = {}) {
    const KRange r = default_k_range(sample.size());
    return reiss_thomas(sample, theta, r.k_min, r.k_max, opt);
}

} // namespace tailmean
