// mc.hpp
//
// Seeded Monte Carlo harness: bias/RMSE of the two mean estimators,
// normality of their sampling distribution, and coverage of the asymptotic
// confidence interval.
//
// Replication r at sample size n draws from the sub-stream
// derive_key(seed, {n, r}), so results do not depend on the order of
// `sizes`, on which other sizes are run, or on the thread count.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "classic.hpp"
#include "cml.hpp"
#include "dist.hpp"
#include "error.hpp"
#include "gof.hpp"
#include "ksel.hpp"
#include "rng.hpp"

namespace tailmean {

enum class KPolicyKind { ReissThomas, Fixed, TheoreticalOpt };

inline std::string_view to_string(KPolicyKind p) {
    switch (p) {
    case KPolicyKind::ReissThomas: return "reiss-thomas";
    case KPolicyKind::Fixed: return "fixed";
    case KPolicyKind::TheoreticalOpt: return "theoretical-opt";
    }
    return "?";
}

struct KPolicy {
    KPolicyKind kind = KPolicyKind::ReissThomas;
    std::size_t k = 0; // only for Fixed

    static KPolicy reiss_thomas() { return {}; }
    static KPolicy fixed(std::size_t k) { return {KPolicyKind::Fixed, k}; }
    static KPolicy theoretical_opt() { return {KPolicyKind::TheoreticalOpt, 0}; }
    bool operator==(const KPolicy &) const = default;
};

struct ExperimentConfig {
    HeavyTailModel model{Family::Frechet, 1.5};
    std::vector<std::size_t> sizes;
    std::size_t replications = 200;
    std::uint64_t seed = 0;
    double level = 0.95;
    double theta = 0.3;
    KPolicy k_policy;

    void validate() const {
        if (!(model.alpha > 0.0) || !std::isfinite(model.alpha)) throw domain_error("experiment: alpha must be positive");
        if (sizes.empty()) throw domain_error("experiment: no sample sizes given");
        for (std::size_t n : sizes)
            if (n < 50) throw domain_error("experiment: sample sizes must be at least 50");
        if (replications < 2) throw domain_error("experiment: need at least two replications");
        if (!(level > 0.0 && level < 1.0)) throw domain_error("experiment: level must lie in (0,1)");
        if (!(theta >= 0.0 && theta <= 0.5)) throw domain_error("experiment: theta must lie in [0, 0.5]");
        if (k_policy.kind == KPolicyKind::Fixed) {
            if (k_policy.k < 2) throw domain_error("experiment: fixed k must be at least 2");
            for (std::size_t n : sizes)
                if (k_policy.k >= n) throw domain_error("experiment: fixed k must be below every sample size");
        }
        if (k_policy.kind == KPolicyKind::TheoreticalOpt) (void)model_hall_constants(model);
    }
};

enum class Experiment { BiasRmse, Normality, Coverage };

inline std::string_view to_string(Experiment e) {
    switch (e) {
    case Experiment::BiasRmse: return "bias-rmse";
    case Experiment::Normality: return "normality";
    case Experiment::Coverage: return "coverage";
    }
    return "?";
}

enum class Estimator { BrMean, PengMean };

inline std::string_view to_string(Estimator e) { return e == Estimator::BrMean ? "br_mean" : "peng_mean"; }

inline constexpr std::array<Estimator, 2> all_estimators = {Estimator::BrMean, Estimator::PengMean};

enum class SkipReason { InfiniteMean, NonConvergence, InvalidEstimate, KSelection, Other };

inline std::string_view to_string(SkipReason r) {
    switch (r) {
    case SkipReason::InfiniteMean: return "infinite-mean";
    case SkipReason::NonConvergence: return "non-convergence";
    case SkipReason::InvalidEstimate: return "invalid-estimate";
    case SkipReason::KSelection: return "k-selection";
    case SkipReason::Other: return "other";
    }
    return "?";
}

/// Outcome of one replication. Estimates are present only when the
/// replication was not skipped.
struct Replication {
    std::size_t index = 0;
    std::size_t k = 0;
    std::optional<double> br_mean;
    std::optional<double> peng_mean;
    std::optional<double> lower;
    std::optional<double> upper;
    std::optional<SkipReason> skipped;
    std::string message;
};

struct EstimatorSummary {
    double mean_estimate = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
};

struct BatteryOutcome {
    std::optional<Battery> results;
    std::string error; // set when the battery could not be run
};

struct CoverageSummary {
    double lcb_mean = 0.0;
    double point_mean = 0.0;
    double ucb_mean = 0.0;
    double coverage = 0.0;
    double mean_length = 0.0;
};

struct SizeRow {
    std::size_t n = 0;
    std::size_t used = 0;
    std::map<SkipReason, std::size_t> skipped;
    bool unreliable = false;
    std::map<Estimator, EstimatorSummary> estimates;
    std::map<Estimator, BatteryOutcome> normality;
    std::optional<CoverageSummary> coverage;
    std::vector<Replication> replications;

    std::size_t skipped_total() const {
        std::size_t s = 0;
        for (const auto &[r, c] : skipped) s += c;
        return s;
    }
};

struct ExperimentReport {
    Experiment experiment = Experiment::BiasRmse;
    ExperimentConfig config;
    double true_mean = 0.0;
    std::vector<SizeRow> rows;
};

namespace mc_detail {

inline SkipReason classify(const std::exception &e) {
    if (dynamic_cast<const infinite_mean_error *>(&e)) return SkipReason::InfiniteMean;
    if (dynamic_cast<const convergence_error *>(&e)) return SkipReason::NonConvergence;
    if (dynamic_cast<const invalid_estimate_error *>(&e)) return SkipReason::InvalidEstimate;
    return SkipReason::Other;
}

inline std::size_t choose_k(const ExperimentConfig &cfg, const SortedSample &sample) {
    switch (cfg.k_policy.kind) {
    case KPolicyKind::Fixed: return cfg.k_policy.k;
    case KPolicyKind::TheoreticalOpt: return k_opt(model_hall_constants(cfg.model), sample.size());
    case KPolicyKind::ReissThomas: break;
    }
    return reiss_thomas(sample, cfg.theta).k_star;
}

inline Replication replicate(const ExperimentConfig &cfg, Experiment kind, std::size_t n, std::size_t r) {
    Replication rep;
    rep.index = r;
    const SortedSample sample = model_sample(cfg.model, n, rng::derive_key(cfg.seed, {n, r}));
    try {
        rep.k = choose_k(cfg, sample);
    } catch (const error &e) {
        rep.skipped = SkipReason::KSelection;
        rep.message = e.what();
        return rep;
    }
    try {
        const MeanEstimate br = br_mean(sample, rep.k);
        double lower = 0.0, upper = 0.0;
        if (kind == Experiment::Coverage) {
            const ConfidenceInterval ci = confidence_interval(br, rep.k, n, cfg.level);
            lower = ci.lower;
            upper = ci.upper;
        }
        const double peng = peng_mean(sample, rep.k).mean_hat;
        rep.br_mean = br.mean_hat;
        rep.peng_mean = peng;
        if (kind == Experiment::Coverage) {
            rep.lower = lower;
            rep.upper = upper;
        }
    } catch (const error &e) {
        rep.skipped = classify(e);
        rep.message = e.what();
    }
    return rep;
}

/// Runs f(0..count-1) on up to `threads` workers; results land in index
/// order regardless of scheduling.
template <class T, class F> std::vector<T> run_indexed(std::size_t count, unsigned threads, F &&f) {
    std::vector<T> out(count);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(threads, 1u), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < count; i = next++) out[i] = f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) t.join();
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

inline EstimatorSummary summarize(const std::vector<double> &est, double truth) {
    EstimatorSummary s;
    if (est.empty()) {
        s.mean_estimate = s.bias = s.rmse = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    double sum = 0.0, sq = 0.0;
    for (double v : est) {
        sum += v;
        sq += (v - truth) * (v - truth);
    }
    const auto m = static_cast<double>(est.size());
    s.mean_estimate = sum / m;
    s.bias = std::abs(s.mean_estimate - truth);
    s.rmse = std::sqrt(sq / m);
    return s;
}

inline BatteryOutcome battery_of(const std::vector<double> &est) {
    BatteryOutcome out;
    try {
        out.results = normality_battery(est);
    } catch (const error &e) {
        out.error = e.what();
    }
    return out;
}

/// Fills the aggregate columns of a row from its replications.
inline void aggregate(SizeRow &row, Experiment kind, double truth) {
    std::vector<double> br, peng;
    double lo = 0.0, hi = 0.0, pt = 0.0, len = 0.0;
    std::size_t covered = 0;
    row.skipped.clear();
    for (const Replication &rep : row.replications) {
        if (rep.skipped) {
            ++row.skipped[*rep.skipped];
            continue;
        }
        br.push_back(*rep.br_mean);
        peng.push_back(*rep.peng_mean);
        if (kind == Experiment::Coverage) {
            lo += *rep.lower;
            hi += *rep.upper;
            pt += *rep.br_mean;
            len += *rep.upper - *rep.lower;
            if (*rep.lower <= truth && truth <= *rep.upper) ++covered;
        }
    }
    row.used = br.size();
    row.unreliable = 4 * row.skipped_total() > row.replications.size();
    row.estimates[Estimator::BrMean] = summarize(br, truth);
    row.estimates[Estimator::PengMean] = summarize(peng, truth);
    if (kind == Experiment::Normality) {
        row.normality[Estimator::BrMean] = battery_of(br);
        row.normality[Estimator::PengMean] = battery_of(peng);
    }
    if (kind == Experiment::Coverage) {
        CoverageSummary c;
        if (row.used > 0) {
            const auto m = static_cast<double>(row.used);
            c = {lo / m, pt / m, hi / m, static_cast<double>(covered) / m, len / m};
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            c = {nan, nan, nan, nan, nan};
        }
        row.coverage = c;
    }
}

inline ExperimentReport run(const ExperimentConfig &cfg, Experiment kind, unsigned threads) {
    cfg.validate();
    const double truth = model_true_mean(cfg.model);
    ExperimentReport report;
    report.experiment = kind;
    report.config = cfg;
    report.true_mean = truth;
    for (std::size_t n : cfg.sizes) {
        SizeRow row;
        row.n = n;
        row.replications = run_indexed<Replication>(cfg.replications, threads,
                                                    [&](std::size_t r) { return replicate(cfg, kind, n, r); });
        aggregate(row, kind, truth);
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace mc_detail

/// Mean, bias and RMSE of both estimators per sample size. A replication
/// is skipped for both estimators when either fails, so the comparison is
/// paired.
inline ExperimentReport run_bias_rmse(const ExperimentConfig &cfg, unsigned threads = 1) {
    return mc_detail::run(cfg, Experiment::BiasRmse, threads);
}

/// Normality battery on the replicated estimates of each estimator.
inline ExperimentReport run_normality(const ExperimentConfig &cfg, unsigned threads = 1) {
    if (cfg.replications < 20) throw domain_error("normality experiment: need at least 20 replications");
    return mc_detail::run(cfg, Experiment::Normality, threads);
}

/// Mean bounds, coverage and mean length of the bias-reduced interval.
inline ExperimentReport run_coverage(const ExperimentConfig &cfg, unsigned threads = 1) {
    return mc_detail::run(cfg, Experiment::Coverage, threads);
}

} // namespace tailmean
