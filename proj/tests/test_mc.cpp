#include <catch_amalgamated.hpp>

#include <cmath>

#include "tailmean/mc.hpp"

using namespace tailmean;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ExperimentConfig quick(std::vector<std::size_t> sizes, std::size_t reps, KPolicy policy = KPolicy::fixed(40)) {
    ExperimentConfig cfg;
    cfg.model = HeavyTailModel(Family::Frechet, 1.5);
    cfg.sizes = std::move(sizes);
    cfg.replications = reps;
    cfg.seed = 31;
    cfg.k_policy = policy;
    return cfg;
}

Replication ok_rep(std::size_t i, double br, double peng) {
    Replication r;
    r.index = i;
    r.k = 10;
    r.br_mean = br;
    r.peng_mean = peng;
    return r;
}

Replication skipped_rep(std::size_t i, SkipReason why) {
    Replication r;
    r.index = i;
    r.skipped = why;
    return r;
}

} // namespace

TEST_CASE("aggregate of two identical replications") {
    SizeRow row;
    row.n = 100;
    row.replications = {ok_rep(0, 3.1, 2.5), ok_rep(1, 3.1, 2.5)};
    mc_detail::aggregate(row, Experiment::BiasRmse, 2.678);
    const auto &br = row.estimates.at(Estimator::BrMean);
    CHECK_THAT(br.rmse, WithinAbs(std::abs(3.1 - 2.678), 1e-15));
    CHECK_THAT(br.bias, WithinAbs(std::abs(3.1 - 2.678), 1e-15));
    CHECK_THAT(row.estimates.at(Estimator::PengMean).rmse, WithinAbs(0.178, 1e-12));
}

TEST_CASE("skips are counted by reason and flag unreliable rows") {
    SizeRow row;
    row.replications = {ok_rep(0, 3, 3), ok_rep(1, 2, 2), skipped_rep(2, SkipReason::InfiniteMean),
                        ok_rep(3, 4, 4)};
    mc_detail::aggregate(row, Experiment::BiasRmse, 3.0);
    CHECK(row.used == 3);
    CHECK(row.skipped.at(SkipReason::InfiniteMean) == 1);
    CHECK_FALSE(row.unreliable);
    row.replications.push_back(skipped_rep(4, SkipReason::NonConvergence));
    mc_detail::aggregate(row, Experiment::BiasRmse, 3.0);
    CHECK(row.skipped_total() == 2);
    CHECK(row.unreliable);
    CHECK_THAT(row.estimates.at(Estimator::BrMean).rmse, WithinAbs(std::sqrt(2.0 / 3.0), 1e-15));
}

TEST_CASE("constant estimates make the normality row unusable") {
    SizeRow row;
    for (std::size_t i = 0; i < 25; ++i) row.replications.push_back(ok_rep(i, 2.0, 1.0 + 0.01 * static_cast<double>(i)));
    mc_detail::aggregate(row, Experiment::Normality, 2.0);
    const auto &br = row.normality.at(Estimator::BrMean);
    CHECK_FALSE(br.results.has_value());
    CHECK_FALSE(br.error.empty());
    CHECK(row.normality.at(Estimator::PengMean).results.has_value());
}

TEST_CASE("config validation") {
    auto cfg = quick({100}, 10);
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.sizes = {40};
    CHECK_THROWS_AS(bad.validate(), domain_error);
    bad = cfg;
    bad.replications = 1;
    CHECK_THROWS_AS(bad.validate(), domain_error);
    bad = cfg;
    bad.k_policy = KPolicy::fixed(100);
    CHECK_THROWS_AS(bad.validate(), domain_error);
    bad = cfg;
    bad.level = 1.0;
    CHECK_THROWS_AS(bad.validate(), domain_error);
    bad = cfg;
    bad.model = HeavyTailModel(Family::Pareto, 1.5);
    bad.k_policy = KPolicy::theoretical_opt();
    CHECK_THROWS_AS(bad.validate(), degenerate_error);
    bad = cfg;
    bad.model = HeavyTailModel(Family::Frechet, 0.9);
    CHECK_THROWS_AS(run_bias_rmse(bad), infinite_mean_error);
    CHECK_THROWS_AS(run_normality(quick({100}, 10)), domain_error);
}

TEST_CASE("bias and rmse recompute from stored replications") {
    const auto report = run_bias_rmse(quick({200, 400}, 12));
    REQUIRE(report.rows.size() == 2);
    CHECK_THAT(report.true_mean, WithinRel(model_true_mean(HeavyTailModel(Family::Frechet, 1.5)), 1e-15));
    for (const auto &row : report.rows) {
        CHECK(row.replications.size() == 12);
        CHECK(row.used + row.skipped_total() == 12);
        double sum = 0.0, sq = 0.0;
        std::size_t m = 0;
        for (const auto &rep : row.replications) {
            if (rep.skipped) {
                CHECK_FALSE(rep.br_mean.has_value());
                continue;
            }
            CHECK(rep.k == 40);
            sum += *rep.br_mean;
            sq += (*rep.br_mean - report.true_mean) * (*rep.br_mean - report.true_mean);
            ++m;
        }
        REQUIRE(m > 0);
        const auto &s = row.estimates.at(Estimator::BrMean);
        CHECK_THAT(s.bias, WithinAbs(std::abs(sum / m - report.true_mean), 1e-12));
        CHECK_THAT(s.rmse, WithinAbs(std::sqrt(sq / m), 1e-12));
    }
}

TEST_CASE("reports are identical across thread counts and size orderings") {
    const auto cfg = quick({150, 300}, 8);
    const auto a = run_bias_rmse(cfg, 1);
    const auto b = run_bias_rmse(cfg, 4);
    auto swapped = cfg;
    swapped.sizes = {300};
    const auto c = run_bias_rmse(swapped, 3);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t r = 0; r < 8; ++r) {
            const auto &x = a.rows[i].replications[r];
            const auto &y = b.rows[i].replications[r];
            CHECK(x.br_mean == y.br_mean);
            CHECK(x.peng_mean == y.peng_mean);
            CHECK(x.skipped == y.skipped);
        }
    for (std::size_t r = 0; r < 8; ++r) CHECK(a.rows[1].replications[r].br_mean == c.rows[0].replications[r].br_mean);
}

TEST_CASE("coverage row") {
    auto cfg = quick({300}, 20);
    const auto narrow = run_coverage(cfg);
    cfg.level = 0.999999;
    const auto wide = run_coverage(cfg);
    const auto &cn = *narrow.rows[0].coverage;
    const auto &cw = *wide.rows[0].coverage;
    CHECK(cn.coverage >= 0.0);
    CHECK(cn.coverage <= 1.0);
    CHECK(cn.lcb_mean < cn.point_mean);
    CHECK(cn.point_mean < cn.ucb_mean);
    CHECK_THAT(cn.mean_length, WithinRel(cn.ucb_mean - cn.lcb_mean, 1e-12));
    CHECK(cw.coverage >= cn.coverage);
    CHECK(cw.mean_length > cn.mean_length);
    for (const auto &rep : narrow.rows[0].replications)
        if (!rep.skipped) CHECK(*rep.lower < *rep.upper);
}

TEST_CASE("Reiss-Thomas and theoretical policies") {
    const auto rt = run_bias_rmse(quick({100}, 3, KPolicy::reiss_thomas()));
    for (const auto &rep : rt.rows[0].replications) {
        CHECK(rep.k >= 10);
        CHECK(rep.k <= 50);
    }
    const auto opt = run_bias_rmse(quick({1000}, 2, KPolicy::theoretical_opt()));
    for (const auto &rep : opt.rows[0].replications) CHECK(rep.k == 200);
}
