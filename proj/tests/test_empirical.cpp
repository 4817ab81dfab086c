#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "tailmean/empirical.hpp"

using namespace tailmean;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const double e = std::exp(1.0);
SortedSample powers() { return SortedSample({std::pow(e, 3), 1.0, e * e, e}); }
} // namespace

TEST_CASE("sample construction validates and sorts") {
    const auto s = powers();
    CHECK(s.size() == 4);
    CHECK(s.order_stat(1) == 1.0);
    CHECK(s.order_stat(3) == e * e);
    CHECK(s.order_stat(4) == std::pow(e, 3));
    CHECK(s.upper(1) == std::pow(e, 3));
    CHECK_THROWS_AS(SortedSample({}), size_error);
    CHECK_THROWS_AS(SortedSample({1.0, 0.0}), data_error);
    CHECK_THROWS_AS(SortedSample({1.0, -2.0}), data_error);
    CHECK_THROWS_AS(SortedSample({1.0, NAN}), data_error);
    CHECK_THROWS_AS(s.order_stat(0), index_error);
    CHECK_THROWS_AS(s.order_stat(5), index_error);
}

TEST_CASE("empirical quantile uses the inf definition") {
    const SortedSample s({1, 2, 3, 4});
    CHECK(empirical_quantile(s, 0.5) == 2);
    CHECK(empirical_quantile(s, 1.0) == 4);
    CHECK(empirical_quantile(s, 0.25) == 1);
    CHECK(empirical_quantile(s, 0.25 + 1e-9) == 2);
    CHECK_THROWS_AS(empirical_quantile(s, 0.0), domain_error);
}

TEST_CASE("empirical quantile hits order statistics at i/n and is monotone") {
    std::vector<double> v;
    for (int i = 1; i <= 37; ++i) v.push_back(std::sqrt(i) + 0.1 * i);
    const SortedSample s(v);
    for (std::size_t i = 1; i <= 37; ++i) CHECK(empirical_quantile(s, static_cast<double>(i) / 37.0) == s.order_stat(i));
    double prev = 0.0;
    for (double p = 0.001; p <= 1.0; p += 0.001) {
        const double q = empirical_quantile(s, p);
        CHECK(q >= prev);
        prev = q;
    }
}

TEST_CASE("tail view of the exponential powers") {
    const auto tv = tail_view(powers(), 3);
    CHECK(tv.threshold == 1.0);
    REQUIRE(tv.log_spacings.size() == 3);
    CHECK_THAT(tv.log_spacings[0], WithinAbs(3.0, 1e-15));
    CHECK_THAT(tv.log_spacings[1], WithinAbs(2.0, 1e-15));
    CHECK_THAT(tv.log_spacings[2], WithinAbs(1.0, 1e-15));
    CHECK_THAT(tv.s1, WithinAbs(2.0, 1e-15));
    CHECK_THROWS_AS(tail_view(powers(), 0), index_error);
    CHECK_THROWS_AS(tail_view(powers(), 4), index_error);
}

TEST_CASE("tail view is scale invariant and keeps ties") {
    const SortedSample s({0.3, 1.7, 2.2, 5.0, 11.0, 40.0});
    for (double c : {1e-3, 0.5, 7.0, 1e4}) {
        const auto a = tail_view(s, 4);
        const auto b = tail_view(s.scaled(c), 4);
        for (std::size_t i = 0; i < 4; ++i) CHECK_THAT(b.log_spacings[i], WithinAbs(a.log_spacings[i], 1e-12));
    }
    const auto tied = tail_view(SortedSample({1, 2, 2, 2}), 2);
    CHECK(tied.s1 == 0.0);
    CHECK(tied.log_spacings[0] == 0.0);
    CHECK(tied.log_spacings[1] == 0.0);
}

TEST_CASE("lower tail mean") {
    CHECK_THAT(lower_tail_mean(SortedSample({1, 1.2, 1.4, 1.6}), 3), WithinAbs(0.25, 1e-15));
    CHECK_THAT(lower_tail_mean(SortedSample({1, 2, 3, 4}), 2), WithinAbs(0.75, 1e-15));
    const SortedSample s({0.5, 2, 3.25, 9, 10});
    CHECK_THAT(lower_tail_mean(s, 0), WithinRel(s.mean(), 1e-15));
    for (std::size_t k = 0; k < s.size(); ++k) {
        double top = 0;
        for (std::size_t i = 1; i <= k; ++i) top += s.upper(i);
        CHECK_THAT(lower_tail_mean(s, k) + top / 5.0, WithinRel(s.mean(), 1e-14));
    }
}

TEST_CASE("csv ingestion") {
    std::istringstream ok("value\n1.5\n\n2e3\n  3.25  \n");
    CHECK(read_values(ok, true) == std::vector<double>{1.5, 2000.0, 3.25});

    std::istringstream bad("1\n2\nabc\n");
    try {
        read_values(bad, true);
        FAIL("expected a data error");
    } catch (const data_error &err) {
        CHECK(std::string(err.what()).find("line 3") != std::string::npos);
    }

    std::istringstream neg("1\n-2\n");
    CHECK_THROWS_AS(read_sample(neg), data_error);
    std::istringstream neg_ok("1\n-2\n");
    CHECK(read_values(neg_ok, false) == std::vector<double>{1.0, -2.0});
    std::istringstream zero("0\n");
    CHECK_THROWS_AS(read_sample(zero), data_error);
    std::istringstream comma("1,5\n");
    CHECK_THROWS_AS(read_sample(comma), data_error);
}
