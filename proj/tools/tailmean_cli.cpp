// Command-line front end for the tailmean library.
//
//   tailmean estimate [file] [--k K] [--theta T]
//   tailmean ci       [file] [--k K] [--level L]
//   tailmean select-k [file] [--theta T]
//   tailmean quantile [file] --s P [--k K]
//   tailmean gof      [file]
//   tailmean simulate table1|table2|gof --seed S [--dist D --alpha A --sizes N,.. --reps R]
//
// Exit codes: 0 success, 1 usage, 2 bad data, 3 numerical failure.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tailmean/classic.hpp"
#include "tailmean/cml.hpp"
#include "tailmean/empirical.hpp"
#include "tailmean/gof.hpp"
#include "tailmean/ksel.hpp"
#include "tailmean/mc.hpp"
#include "tailmean/report.hpp"

namespace tl = tailmean;
using nlohmann::json;

namespace {

enum class Format { Table, Csv, Json };

struct Options {
    std::string input;
    std::optional<std::size_t> k;
    std::string k_spec;
    double theta = 0.3;
    double level = 0.95;
    double s = 0.0;
    std::string format = "table";
    std::string dist = "frechet";
    double alpha = 1.5;
    std::vector<std::size_t> sizes;
    std::size_t reps = 200;
    std::uint64_t seed = 0;
    bool full = false;
    unsigned threads = 0;
    std::string table;
};

Format parse_format(const std::string &f) {
    if (f == "csv") return Format::Csv;
    if (f == "json") return Format::Json;
    return Format::Table;
}

std::string num(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> load_values(const std::string &path, bool positive) {
    if (path.empty() || path == "-") return tl::read_values(std::cin, positive);
    std::ifstream in(path);
    if (!in) throw tl::data_error("cannot open '" + path + "'");
    return tl::read_values(in, positive);
}

tl::SortedSample load_sample(const Options &o) { return tl::SortedSample(load_values(o.input, true)); }

// k from --k, or the Reiss-Thomas choice.
std::size_t pick_k(const Options &o, const tl::SortedSample &sample, std::string &how) {
    if (o.k) {
        how = "fixed";
        return *o.k;
    }
    how = "reiss-thomas";
    return tl::reiss_thomas(sample, o.theta).k_star;
}

// Everything `estimate` and `ci` report. Missing pieces carry their error.
struct Estimates {
    std::size_t n = 0, k = 0;
    std::string k_policy;
    double hill = NAN;
    std::optional<tl::PengEstimate> peng;
    std::string peng_error;
    std::optional<tl::CmlEstimate> cml;
    std::string cml_error;
    std::optional<tl::MeanEstimate> br;
    std::string br_error;
    std::optional<tl::ConfidenceInterval> ci;
    std::string ci_error;

    bool failed() const { return !peng || !br; }
};

Estimates compute(const Options &o, bool with_ci) {
    const tl::SortedSample sample = load_sample(o);
    Estimates e;
    e.n = sample.size();
    e.k = pick_k(o, sample, e.k_policy);
    const tl::TailView tv = tl::tail_view(sample, e.k);
    e.hill = tl::hill(tv);
    try {
        e.peng = tl::peng_mean(sample, e.k);
    } catch (const tl::numerical_error &err) {
        e.peng_error = err.what();
    }
    try {
        e.cml = tl::cml_solve(tv);
    } catch (const tl::numerical_error &err) {
        e.cml_error = err.what();
    } catch (const tl::index_error &err) {
        e.cml_error = err.what();
    }
    if (e.cml) {
        try {
            e.br = tl::cml_detail::br_mean_from(sample, tv, *e.cml);
        } catch (const tl::numerical_error &err) {
            e.br_error = err.what();
        }
    } else {
        e.br_error = e.cml_error;
    }
    if (with_ci && e.br) {
        try {
            e.ci = tl::confidence_interval(*e.br, e.k, e.n, o.level);
        } catch (const tl::numerical_error &err) {
            e.ci_error = err.what();
        }
    } else if (with_ci) {
        e.ci_error = e.br_error;
    }
    return e;
}

void emit(const Estimates &e, Format f, bool with_ci) {
    if (f == Format::Json) {
        json j = {{"n", e.n}, {"k", e.k}, {"k_policy", e.k_policy}, {"hill_alpha", jnum(e.hill)}};
        j["peng_mean"] = e.peng ? jnum(e.peng->mean_hat) : json(nullptr);
        if (!e.peng_error.empty()) j["peng_error"] = e.peng_error;
        if (e.cml) {
            j["cml"] = {{"alpha", e.cml->alpha_hat},       {"beta", e.cml->beta_hat},
                        {"c", e.cml->c_hat},               {"d", e.cml->d_hat},
                        {"residual_norm", e.cml->residual_norm}, {"iterations", e.cml->iterations},
                        {"from_grid", e.cml->from_grid}};
        } else {
            j["cml"] = nullptr;
            j["cml_error"] = e.cml_error;
        }
        j["br_mean"] = e.br ? jnum(e.br->mean_hat) : json(nullptr);
        if (e.br) {
            j["sigma"] = jnum(e.br->sigma);
            j["std_err"] = jnum(e.br->std_err);
        }
        if (!e.br_error.empty()) j["br_error"] = e.br_error;
        if (with_ci) {
            if (e.ci) {
                j["ci"] = {{"level", e.ci->level}, {"lower", e.ci->lower}, {"upper", e.ci->upper}};
            } else {
                j["ci"] = nullptr;
                j["ci_error"] = e.ci_error;
            }
        }
        std::cout << j.dump(2) << '\n';
        return;
    }
    auto opt = [](bool have, double v) { return have ? num(v) : std::string("NA"); };
    if (f == Format::Csv) {
        std::cout << "n,k,k_policy,hill_alpha,peng_mean,alpha,beta,c,d,br_mean";
        if (with_ci) std::cout << ",level,lower,upper";
        std::cout << '\n'
                  << e.n << ',' << e.k << ',' << e.k_policy << ',' << num(e.hill) << ','
                  << opt(e.peng.has_value(), e.peng ? e.peng->mean_hat : 0) << ','
                  << opt(e.cml.has_value(), e.cml ? e.cml->alpha_hat : 0) << ','
                  << opt(e.cml.has_value(), e.cml ? e.cml->beta_hat : 0) << ','
                  << opt(e.cml.has_value(), e.cml ? e.cml->c_hat : 0) << ','
                  << opt(e.cml.has_value(), e.cml ? e.cml->d_hat : 0) << ','
                  << opt(e.br.has_value(), e.br ? e.br->mean_hat : 0);
        if (with_ci)
            std::cout << ',' << num(e.ci ? e.ci->level : NAN) << ',' << opt(e.ci.has_value(), e.ci ? e.ci->lower : 0)
                      << ',' << opt(e.ci.has_value(), e.ci ? e.ci->upper : 0);
        std::cout << '\n';
        return;
    }
    std::cout << "n            " << e.n << "\n"
              << "k            " << e.k << " (" << e.k_policy << ")\n"
              << "hill alpha   " << num(e.hill) << "\n"
              << "peng mean    " << (e.peng ? num(e.peng->mean_hat) : "unavailable: " + e.peng_error) << "\n";
    if (e.cml) {
        std::cout << "cml alpha    " << num(e.cml->alpha_hat) << "\n"
                  << "cml beta     " << num(e.cml->beta_hat) << "\n"
                  << "cml c        " << num(e.cml->c_hat) << "\n"
                  << "cml d        " << num(e.cml->d_hat) << "\n"
                  << "residual     " << num(e.cml->residual_norm) << " after " << e.cml->iterations
                  << " iterations" << (e.cml->from_grid ? " (grid start)" : "") << "\n";
    } else {
        std::cout << "cml          unavailable: " << e.cml_error << "\n";
    }
    std::cout << "br mean      " << (e.br ? num(e.br->mean_hat) : "unavailable: " + e.br_error) << "\n";
    if (e.br && !std::isnan(e.br->std_err)) std::cout << "std error    " << num(e.br->std_err) << "\n";
    if (with_ci) {
        if (e.ci)
            std::cout << "ci " << num(100 * e.ci->level) << "%    [" << num(e.ci->lower) << ", " << num(e.ci->upper)
                      << "]\n";
        else
            std::cout << "ci           unavailable: " << e.ci_error << "\n";
    }
}

int cmd_estimate(const Options &o, bool with_ci) {
    const Estimates e = compute(o, with_ci);
    emit(e, parse_format(o.format), with_ci);
    if (e.failed()) {
        std::cerr << "tailmean: " << (!e.peng ? e.peng_error : e.br_error) << '\n';
        return 3;
    }
    if (with_ci && !e.ci) {
        std::cerr << "tailmean: " << e.ci_error << '\n';
        return 3;
    }
    return 0;
}

int cmd_select_k(const Options &o) {
    const tl::SortedSample sample = load_sample(o);
    const tl::KSelection sel = tl::reiss_thomas(sample, o.theta);
    const Format f = parse_format(o.format);
    if (f == Format::Json) {
        json path = json::array();
        for (const auto &[k, v] : sel.objective_values) {
            const auto &a = sel.alpha_path[k - 1];
            path.push_back({{"k", k}, {"objective", v}, {"alpha", a.alpha ? json(*a.alpha) : json(nullptr)},
                            {"fallback", a.fallback}});
        }
        std::cout << json{{"k_star", sel.k_star}, {"theta", sel.theta}, {"path", path}}.dump(2) << '\n';
        return 0;
    }
    if (f == Format::Table) std::cout << "# k_star " << sel.k_star << " (theta " << sel.theta << ")\n";
    std::cout << "k,objective,alpha,fallback\n";
    for (const auto &[k, v] : sel.objective_values) {
        const auto &a = sel.alpha_path[k - 1];
        std::cout << k << ',' << num(v) << ',' << (a.alpha ? num(*a.alpha) : "NA") << ',' << (a.fallback ? 1 : 0)
                  << '\n';
    }
    return 0;
}

int cmd_quantile(const Options &o) {
    const tl::SortedSample sample = load_sample(o);
    std::string how;
    const std::size_t k = pick_k(o, sample, how);
    const double w = tl::weissman_quantile(sample, k, o.s);
    std::optional<double> lpy;
    std::string err;
    try {
        const tl::CmlEstimate c = tl::cml_solve(sample, k);
        lpy = tl::lpy_quantile(c.c_hat, c.d_hat, c.alpha_hat, c.beta_hat, o.s);
    } catch (const tl::numerical_error &e) {
        err = e.what();
    }
    const Format f = parse_format(o.format);
    if (f == Format::Json) {
        json j = {{"s", o.s}, {"k", k}, {"k_policy", how}, {"weissman", w}, {"lpy", lpy ? json(*lpy) : json(nullptr)}};
        if (!err.empty()) j["lpy_error"] = err;
        std::cout << j.dump(2) << '\n';
    } else if (f == Format::Csv) {
        std::cout << "s,k,weissman,lpy\n" << num(o.s) << ',' << k << ',' << num(w) << ',' << (lpy ? num(*lpy) : "NA") << '\n';
    } else {
        std::cout << "s          " << num(o.s) << "\n"
                  << "k          " << k << " (" << how << ")\n"
                  << "weissman   " << num(w) << "\n"
                  << "lpy        " << (lpy ? num(*lpy) : "unavailable: " + err) << "\n";
    }
    if (!lpy) {
        std::cerr << "tailmean: " << err << '\n';
        return 3;
    }
    return 0;
}

int cmd_gof(const Options &o) {
    const std::vector<double> values = load_values(o.input, false);
    const tl::Battery b = tl::normality_battery(values);
    const Format f = parse_format(o.format);
    if (f == Format::Json) {
        json j = json::object();
        for (const auto &[t, r] : b)
            j[std::string(tl::to_string(t))] = {{"statistic", jnum(r.statistic)}, {"p_value", jnum(r.p_value)}, {"n", r.n}};
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    if (f == Format::Csv) std::cout << "test,statistic,p_value,n\n";
    for (const auto &[t, r] : b) {
        if (f == Format::Csv)
            std::cout << tl::to_string(t) << ',' << num(r.statistic) << ',' << num(r.p_value) << ',' << r.n << '\n';
        else
            std::printf("%-8s statistic %-12s p-value %s\n", std::string(tl::to_string(t)).c_str(),
                        num(r.statistic).c_str(), num(r.p_value).c_str());
    }
    return 0;
}

tl::KPolicy parse_k_policy(const std::string &spec) {
    if (spec.empty() || spec == "rt" || spec == "reiss-thomas") return tl::KPolicy::reiss_thomas();
    if (spec == "opt") return tl::KPolicy::theoretical_opt();
    std::size_t k = 0;
    const auto [p, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), k);
    if (ec != std::errc() || p != spec.data() + spec.size()) throw CLI::ValidationError("--k", "expected rt, opt or a count");
    return tl::KPolicy::fixed(k);
}

int cmd_simulate(const Options &o) {
    tl::ExperimentConfig cfg;
    cfg.model = tl::HeavyTailModel(tl::parse_family(o.dist), o.alpha);
    cfg.sizes = o.sizes;
    if (cfg.sizes.empty())
        cfg.sizes = o.table == "table1" ? std::vector<std::size_t>{500, 1000, 2000, 3000}
                                        : std::vector<std::size_t>{100, 200, 400, 500, 800, 1000};
    cfg.replications = o.reps;
    cfg.seed = o.seed;
    cfg.level = o.level;
    cfg.theta = o.theta;
    cfg.k_policy = parse_k_policy(o.k_spec);
    try {
        cfg.validate();
    } catch (const tl::domain_error &e) {
        throw CLI::ValidationError(e.what());
    }
    const unsigned threads = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());

    tl::ExperimentReport r;
    if (o.table == "table1")
        r = tl::run_bias_rmse(cfg, threads);
    else if (o.table == "table2")
        r = tl::run_coverage(cfg, threads);
    else
        r = tl::run_normality(cfg, threads);

    switch (parse_format(o.format)) {
    case Format::Json: std::cout << tl::to_json(r, o.full).dump(2) << '\n'; break;
    case Format::Csv: tl::write_csv(std::cout, r); break;
    case Format::Table: tl::write_table(std::cout, r); break;
    }
    return 0;
}

void add_format(CLI::App *cmd, Options &o) {
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));
}

void add_input(CLI::App *cmd, Options &o) {
    cmd->add_option("input", o.input, "CSV file with one value per line (default: standard input)");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Heavy-tailed mean estimation: Hill, Peng and bias-reduced estimators"};
    app.require_subcommand(1);
    Options o;
    std::size_t k_value = 0;

    auto *estimate = app.add_subcommand("estimate", "Tail index and mean estimates");
    auto *ci = app.add_subcommand("ci", "Estimates plus the asymptotic confidence interval");
    auto *select = app.add_subcommand("select-k", "Reiss-Thomas sample fraction and its objective path");
    auto *quantile = app.add_subcommand("quantile", "Weissman and bias-reduced high quantiles");
    auto *gof = app.add_subcommand("gof", "Normality battery on a column of values");
    auto *simulate = app.add_subcommand("simulate", "Monte Carlo experiments");

    for (auto *cmd : {estimate, ci, select, quantile, gof}) {
        add_input(cmd, o);
        add_format(cmd, o);
    }
    for (auto *cmd : {estimate, ci, quantile})
        cmd->add_option("--k", k_value, "Number of upper order statistics (default: Reiss-Thomas)")
            ->check(CLI::PositiveNumber);
    for (auto *cmd : {estimate, ci, select, quantile, simulate})
        cmd->add_option("--theta", o.theta, "Reiss-Thomas weight exponent")->check(CLI::Range(0.0, 0.5));
    for (auto *cmd : {ci, simulate}) cmd->add_option("--level", o.level, "Confidence level")->check(CLI::Range(0.0, 1.0));
    quantile->add_option("--s", o.s, "Exceedance probability")->required()->check(CLI::Range(0.0, 1.0));

    simulate->add_option("table", o.table, "Experiment")->required()->check(CLI::IsMember({"table1", "table2", "gof"}));
    simulate->add_option("--dist", o.dist, "Distribution family")->check(CLI::IsMember({"frechet", "pareto"}));
    simulate->add_option("--alpha", o.alpha, "Tail index")->check(CLI::PositiveNumber);
    simulate->add_option("--sizes", o.sizes, "Sample sizes")->delimiter(',');
    simulate->add_option("--reps", o.reps, "Replications per size");
    simulate->add_option("--seed", o.seed, "Random seed")->required();
    simulate->add_option("--k", o.k_spec, "Sample fraction policy: rt, opt or a fixed count");
    simulate->add_flag("--full", o.full, "Include per-replication records in JSON output");
    simulate->add_option("--threads", o.threads, "Worker threads (default: all cores)");
    add_format(simulate, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 1;
    }
    for (auto *cmd : {estimate, ci, quantile})
        if (cmd->parsed() && cmd->count("--k") > 0) o.k = k_value;

    try {
        if (estimate->parsed()) return cmd_estimate(o, false);
        if (ci->parsed()) return cmd_estimate(o, true);
        if (select->parsed()) return cmd_select_k(o);
        if (quantile->parsed()) return cmd_quantile(o);
        if (gof->parsed()) return cmd_gof(o);
        if (simulate->parsed()) return cmd_simulate(o);
    } catch (const CLI::ValidationError &e) {
        std::cerr << "tailmean: " << e.what() << '\n';
        return 1;
    } catch (const tl::data_error &e) {
        std::cerr << "tailmean: " << e.what() << '\n';
        return 2;
    } catch (const tl::error &e) {
        std::cerr << "tailmean: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
