#include <catch_amalgamated.hpp>

#include <cmath>

#include "tailmean/special.hpp"

using namespace tailmean::special;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("lanczos gamma agrees with std::tgamma on (0, 10)") {
    for (double x = 0.05; x < 10.0; x += 0.0371) CHECK_THAT(lanczos_gamma(x), WithinRel(std::tgamma(x), 1e-10));
}

TEST_CASE("lanczos gamma reflection branch and integers") {
    CHECK_THAT(lanczos_gamma(0.5), WithinRel(std::sqrt(M_PI), 1e-12));
    CHECK_THAT(lanczos_gamma(1.0), WithinRel(1.0, 1e-12));
    CHECK_THAT(lanczos_gamma(5.0), WithinRel(24.0, 1e-12));
    CHECK_THAT(lanczos_gamma(1.0 / 3.0), WithinRel(std::tgamma(1.0 / 3.0), 1e-12));
}

TEST_CASE("normal quantile inverts the erfc-based cdf") {
    for (double p : {1e-10, 1e-6, 0.001, 0.025, 0.2, 0.5, 0.8, 0.975, 0.999, 1 - 1e-9}) {
        const double z = normal_quantile(p);
        CHECK_THAT(0.5 * std::erfc(-z / std::sqrt(2.0)), WithinRel(p, 1e-9));
    }
    CHECK_THAT(normal_quantile(0.975), WithinAbs(1.959963984540054, 1e-9));
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK_THROWS_AS(normal_quantile(0.0), tailmean::domain_error);
    CHECK_THROWS_AS(normal_quantile(1.0), tailmean::domain_error);
}

TEST_CASE("kolmogorov survival function at tabulated points") {
    // Classical asymptotic critical values.
    CHECK_THAT(kolmogorov_sf(1.3581), WithinAbs(0.05, 2e-4));
    CHECK_THAT(kolmogorov_sf(1.6276), WithinAbs(0.01, 2e-4));
    CHECK_THAT(kolmogorov_sf(1.2238), WithinAbs(0.10, 2e-4));
    CHECK(kolmogorov_sf(0.0) == 1.0);
    // Both series branches meet at lambda = 1.
    CHECK_THAT(kolmogorov_sf(1.0 - 1e-9), WithinAbs(kolmogorov_sf(1.0 + 1e-9), 1e-7));
    double prev = 1.0;
    for (double l = 0.05; l < 3.0; l += 0.05) {
        const double v = kolmogorov_sf(l);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("cramer-von mises survival function at tabulated points") {
    CHECK_THAT(cvm_sf(0.461), WithinAbs(0.05, 1e-3));
    CHECK_THAT(cvm_sf(0.743), WithinAbs(0.01, 5e-4));
    CHECK_THAT(cvm_sf(0.347), WithinAbs(0.10, 1e-3));
    CHECK(cvm_sf(0.0) == 1.0);
}

TEST_CASE("chi-square survival function") {
    CHECK_THAT(chi2_sf(3.841458820694124, 1), WithinRel(0.05, 1e-9));
    CHECK_THAT(chi2_sf(2.0, 2), WithinRel(std::exp(-1.0), 1e-12));
    CHECK(chi2_sf(0.0, 5) == 1.0);
}
