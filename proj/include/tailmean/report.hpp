// report.hpp
//
// Serialization of experiment reports: JSON (lossless, round-trips through
// from_json), CSV with one row per size per estimator, and a plain text
// table for terminals.

#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mc.hpp"

namespace tailmean {

namespace report_detail {

using nlohmann::json;

template <class E, std::size_t N> E enum_from(std::string_view name, const std::array<E, N> &values) {
    for (E v : values)
        if (to_string(v) == name) return v;
    throw domain_error("unrecognized name '" + std::string(name) + "'");
}

inline constexpr std::array<SkipReason, 5> all_skip_reasons = {SkipReason::InfiniteMean, SkipReason::NonConvergence,
                                                               SkipReason::InvalidEstimate, SkipReason::KSelection,
                                                               SkipReason::Other};
inline constexpr std::array<Experiment, 3> all_experiments = {Experiment::BiasRmse, Experiment::Normality,
                                                              Experiment::Coverage};
inline constexpr std::array<KPolicyKind, 3> all_policies = {KPolicyKind::ReissThomas, KPolicyKind::Fixed,
                                                            KPolicyKind::TheoreticalOpt};

// NaN has no JSON literal; it is written as null and read back as NaN.
inline json num(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
inline double num(const json &j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

inline json opt_num(const std::optional<double> &v) { return v ? num(*v) : json(nullptr); }
inline std::optional<double> opt_num(const json &j, const char *key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

inline json to_json(const ExperimentConfig &c) {
    return {{"family", to_string(c.model.family)},
            {"alpha", c.model.alpha},
            {"sizes", c.sizes},
            {"replications", c.replications},
            {"seed", c.seed},
            {"level", c.level},
            {"theta", c.theta},
            {"k_policy", {{"kind", to_string(c.k_policy.kind)}, {"k", c.k_policy.k}}}};
}

inline ExperimentConfig config_from(const json &j) {
    ExperimentConfig c;
    c.model = HeavyTailModel(parse_family(j.at("family").get<std::string>()), j.at("alpha").get<double>());
    c.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    c.replications = j.at("replications").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.level = j.at("level").get<double>();
    c.theta = j.at("theta").get<double>();
    c.k_policy.kind = enum_from(j.at("k_policy").at("kind").get<std::string>(), all_policies);
    c.k_policy.k = j.at("k_policy").at("k").get<std::size_t>();
    return c;
}

inline json to_json(const Replication &r) {
    json j = {{"index", r.index},
              {"k", r.k},
              {"br_mean", opt_num(r.br_mean)},
              {"peng_mean", opt_num(r.peng_mean)},
              {"lower", opt_num(r.lower)},
              {"upper", opt_num(r.upper)}};
    j["skipped"] = r.skipped ? json(to_string(*r.skipped)) : json(nullptr);
    j["message"] = r.message;
    return j;
}

inline Replication replication_from(const json &j) {
    Replication r;
    r.index = j.at("index").get<std::size_t>();
    r.k = j.at("k").get<std::size_t>();
    r.br_mean = opt_num(j, "br_mean");
    r.peng_mean = opt_num(j, "peng_mean");
    r.lower = opt_num(j, "lower");
    r.upper = opt_num(j, "upper");
    if (!j.at("skipped").is_null()) r.skipped = enum_from(j.at("skipped").get<std::string>(), all_skip_reasons);
    r.message = j.at("message").get<std::string>();
    return r;
}

inline json to_json(const SizeRow &row, bool full) {
    json j;
    j["n"] = row.n;
    j["used"] = row.used;
    j["unreliable"] = row.unreliable;
    json skipped = json::object();
    for (const auto &[reason, count] : row.skipped) skipped[std::string(to_string(reason))] = count;
    j["skipped"] = skipped;
    json est = json::object();
    for (const auto &[e, s] : row.estimates)
        est[std::string(to_string(e))] = {{"mean_estimate", num(s.mean_estimate)}, {"bias", num(s.bias)}, {"rmse", num(s.rmse)}};
    j["estimates"] = est;
    if (!row.normality.empty()) {
        json norm = json::object();
        for (const auto &[e, outcome] : row.normality) {
            json o = {{"error", outcome.error}};
            if (outcome.results) {
                json tests = json::object();
                for (const auto &[t, r] : *outcome.results)
                    tests[std::string(to_string(t))] = {{"statistic", num(r.statistic)}, {"p_value", num(r.p_value)}, {"n", r.n}};
                o["tests"] = tests;
            } else {
                o["tests"] = nullptr;
            }
            norm[std::string(to_string(e))] = o;
        }
        j["normality"] = norm;
    }
    if (row.coverage) {
        const CoverageSummary &c = *row.coverage;
        j["coverage"] = {{"lcb_mean", num(c.lcb_mean)},   {"point_mean", num(c.point_mean)},
                         {"ucb_mean", num(c.ucb_mean)},   {"coverage", num(c.coverage)},
                         {"mean_length", num(c.mean_length)}};
    }
    if (full) {
        json reps = json::array();
        for (const Replication &r : row.replications) reps.push_back(to_json(r));
        j["replications"] = reps;
    }
    return j;
}

inline SizeRow row_from(const json &j) {
    SizeRow row;
    row.n = j.at("n").get<std::size_t>();
    row.used = j.at("used").get<std::size_t>();
    row.unreliable = j.at("unreliable").get<bool>();
    for (const auto &[name, count] : j.at("skipped").items())
        row.skipped[enum_from(name, all_skip_reasons)] = count.get<std::size_t>();
    for (const auto &[name, s] : j.at("estimates").items())
        row.estimates[enum_from(name, all_estimators)] = {num(s.at("mean_estimate")), num(s.at("bias")), num(s.at("rmse"))};
    if (j.contains("normality")) {
        for (const auto &[name, o] : j.at("normality").items()) {
            BatteryOutcome outcome;
            outcome.error = o.at("error").get<std::string>();
            if (!o.at("tests").is_null()) {
                Battery b;
                for (const auto &[tname, r] : o.at("tests").items()) {
                    const TestKind t = enum_from(tname, all_tests);
                    b[t] = TestResult{num(r.at("statistic")), num(r.at("p_value")), t, r.at("n").get<std::size_t>()};
                }
                outcome.results = std::move(b);
            }
            row.normality[enum_from(name, all_estimators)] = std::move(outcome);
        }
    }
    if (j.contains("coverage")) {
        const json &c = j.at("coverage");
        row.coverage = CoverageSummary{num(c.at("lcb_mean")), num(c.at("point_mean")), num(c.at("ucb_mean")),
                                       num(c.at("coverage")), num(c.at("mean_length"))};
    }
    if (j.contains("replications"))
        for (const json &r : j.at("replications")) row.replications.push_back(replication_from(r));
    return row;
}

inline std::string fmt(double v, const char *spec) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

} // namespace report_detail

/// Full report as JSON. Per-replication records are included only when
/// `full` is set.
inline nlohmann::json to_json(const ExperimentReport &r, bool full = false) {
    nlohmann::json j;
    j["experiment"] = to_string(r.experiment);
    j["config"] = report_detail::to_json(r.config);
    j["true_mean"] = report_detail::num(r.true_mean);
    j["rows"] = nlohmann::json::array();
    for (const SizeRow &row : r.rows) j["rows"].push_back(report_detail::to_json(row, full));
    return j;
}

inline ExperimentReport report_from_json(const nlohmann::json &j) {
    ExperimentReport r;
    r.experiment = report_detail::enum_from(j.at("experiment").get<std::string>(), report_detail::all_experiments);
    r.config = report_detail::config_from(j.at("config"));
    r.true_mean = report_detail::num(j.at("true_mean"));
    for (const auto &row : j.at("rows")) r.rows.push_back(report_detail::row_from(row));
    return r;
}

/// One line per size per estimator. Columns depend on the experiment.
inline void write_csv(std::ostream &os, const ExperimentReport &r) {
    using report_detail::fmt;
    const char *g = "%.10g";
    switch (r.experiment) {
    case Experiment::BiasRmse: os << "n,estimator,mean_estimate,bias,rmse,used,skipped,unreliable\n"; break;
    case Experiment::Normality: os << "n,estimator,cvm_p,ks_p,sw_p,pearson_p,used,skipped,unreliable,error\n"; break;
    case Experiment::Coverage:
        os << "n,estimator,lcb_mean,point_mean,ucb_mean,coverage,mean_length,used,skipped,unreliable\n";
        break;
    }
    for (const SizeRow &row : r.rows) {
        const std::string tail =
            std::to_string(row.used) + "," + std::to_string(row.skipped_total()) + "," + (row.unreliable ? "1" : "0");
        for (Estimator e : all_estimators) {
            if (r.experiment == Experiment::Coverage && e != Estimator::BrMean) continue;
            os << row.n << ',' << to_string(e) << ',';
            switch (r.experiment) {
            case Experiment::BiasRmse: {
                const EstimatorSummary &s = row.estimates.at(e);
                os << fmt(s.mean_estimate, g) << ',' << fmt(s.bias, g) << ',' << fmt(s.rmse, g) << ',' << tail << '\n';
                break;
            }
            case Experiment::Normality: {
                const BatteryOutcome &o = row.normality.at(e);
                for (TestKind t : all_tests)
                    os << (o.results ? fmt(o.results->at(t).p_value, g) : std::string("NA")) << ',';
                os << tail << ',' << '"' << o.error << '"' << '\n';
                break;
            }
            case Experiment::Coverage: {
                const CoverageSummary &c = *row.coverage;
                os << fmt(c.lcb_mean, g) << ',' << fmt(c.point_mean, g) << ',' << fmt(c.ucb_mean, g) << ','
                   << fmt(c.coverage, g) << ',' << fmt(c.mean_length, g) << ',' << tail << '\n';
                break;
            }
            }
        }
    }
}

/// Human-readable table.
inline void write_table(std::ostream &os, const ExperimentReport &r) {
    using report_detail::fmt;
    char line[256];
    os << to_string(r.experiment) << ": " << to_string(r.config.model.family) << " alpha=" << r.config.model.alpha
       << ", " << r.config.replications << " replications, seed " << r.config.seed << ", true mean "
       << fmt(r.true_mean, "%.4f") << '\n';
    switch (r.experiment) {
    case Experiment::BiasRmse:
        std::snprintf(line, sizeof line, "%8s  %-10s %10s %10s %10s %6s %8s\n", "n", "estimator", "estimate", "bias",
                      "rmse", "used", "skipped");
        break;
    case Experiment::Normality:
        std::snprintf(line, sizeof line, "%8s  %-10s %8s %8s %8s %8s %6s %8s\n", "n", "estimator", "CvM", "KS", "SW",
                      "Pearson", "used", "skipped");
        break;
    case Experiment::Coverage:
        std::snprintf(line, sizeof line, "%8s  %10s %10s %10s %8s %10s %6s %8s\n", "n", "lcb", "mean", "ucb", "covpr",
                      "length", "used", "skipped");
        break;
    }
    os << line;
    for (const SizeRow &row : r.rows) {
        const char *flag = row.unreliable ? "  (unreliable)" : "";
        if (r.experiment == Experiment::Coverage) {
            const CoverageSummary &c = *row.coverage;
            std::snprintf(line, sizeof line, "%8zu  %10s %10s %10s %8s %10s %6zu %8zu%s\n", row.n,
                          fmt(c.lcb_mean, "%.3f").c_str(), fmt(c.point_mean, "%.3f").c_str(),
                          fmt(c.ucb_mean, "%.3f").c_str(), fmt(c.coverage, "%.3f").c_str(),
                          fmt(c.mean_length, "%.3f").c_str(), row.used, row.skipped_total(), flag);
            os << line;
            continue;
        }
        for (Estimator e : all_estimators) {
            if (r.experiment == Experiment::BiasRmse) {
                const EstimatorSummary &s = row.estimates.at(e);
                std::snprintf(line, sizeof line, "%8zu  %-10s %10s %10s %10s %6zu %8zu%s\n", row.n,
                              std::string(to_string(e)).c_str(), fmt(s.mean_estimate, "%.3f").c_str(),
                              fmt(s.bias, "%.3f").c_str(), fmt(s.rmse, "%.3f").c_str(), row.used, row.skipped_total(),
                              flag);
            } else {
                const BatteryOutcome &o = row.normality.at(e);
                std::string p[4];
                for (std::size_t t = 0; t < 4; ++t)
                    p[t] = o.results ? fmt(o.results->at(all_tests[t]).p_value, "%.3f") : std::string("NA");
                std::snprintf(line, sizeof line, "%8zu  %-10s %8s %8s %8s %8s %6zu %8zu%s\n", row.n,
                              std::string(to_string(e)).c_str(), p[0].c_str(), p[1].c_str(), p[2].c_str(),
                              p[3].c_str(), row.used, row.skipped_total(), flag);
            }
            os << line;
        }
    }
    for (const SizeRow &row : r.rows)
        for (const auto &[reason, count] : row.skipped)
            os << "  n=" << row.n << " skipped " << count << " (" << to_string(reason) << ")\n";
}

} // namespace tailmean
