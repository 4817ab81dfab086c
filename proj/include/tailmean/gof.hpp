// gof.hpp
//
// Normality checks applied to Monte Carlo estimator output: Cramer-von
// Mises, Kolmogorov-Smirnov, Shapiro-Wilk and Pearson chi-square.
//
// ks_test and cvm_test test against a fully specified cdf and use the
// asymptotic Kolmogorov and W^2 laws. The battery tests composite normality
// (mean and sd estimated), where those laws are far too lenient; it uses
// the Lilliefors p-value of Dallal and Wilkinson for KS and Stephens'
// modified-statistic approximation for CvM instead.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "special.hpp"

namespace tailmean {

enum class TestKind { CvM, KS, SW, Pearson };

inline std::string_view to_string(TestKind t) {
    switch (t) {
    case TestKind::CvM: return "CvM";
    case TestKind::KS: return "KS";
    case TestKind::SW: return "SW";
    case TestKind::Pearson: return "Pearson";
    }
    return "?";
}

inline constexpr std::array<TestKind, 4> all_tests = {TestKind::CvM, TestKind::KS, TestKind::SW, TestKind::Pearson};

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    TestKind test = TestKind::KS;
    std::size_t n = 0;
};

namespace gof_detail {

inline std::vector<double> sorted_copy(std::span<const double> data) {
    std::vector<double> v(data.begin(), data.end());
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace gof_detail

template <class Cdf>
TestResult ks_test(std::span<const double> data, Cdf &&cdf) {
    if (data.empty()) throw size_error("ks_test: empty sample");
    const auto x = gof_detail::sorted_copy(data);
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (i + 1.0) / n - f, f - i / n});
    }
    return {d, special::kolmogorov_sf(std::sqrt(n) * d), TestKind::KS, x.size()};
}

template <class Cdf>
TestResult cvm_test(std::span<const double> data, Cdf &&cdf) {
    if (data.empty()) throw size_error("cvm_test: empty sample");
    const auto x = gof_detail::sorted_copy(data);
    const double n = static_cast<double>(x.size());
    double w2 = 1.0 / (12.0 * n);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dev = cdf(x[i]) - (2.0 * i + 1.0) / (2.0 * n);
        w2 += dev * dev;
    }
    return {w2, special::cvm_sf(w2), TestKind::CvM, x.size()};
}

namespace gof_detail {

/// Lilliefors p-value for the KS distance of studentized data from N(0,1):
/// Dallal-Wilkinson below 0.1, Stephens' modified statistic above.
inline double lilliefors_p(double d, std::size_t n) {
    const double nn = static_cast<double>(n);
    double dd = d, m = nn;
    if (nn > 100.0) {
        dd = d * std::pow(nn / 100.0, 0.49);
        m = 100.0;
    }
    double p = std::exp(-7.01256 * dd * dd * (m + 2.78019) + 2.99587 * dd * std::sqrt(m + 2.78019) - 0.122119 +
                        0.974598 / std::sqrt(m) + 1.67997 / m);
    if (p > 0.1) {
        const double k = (std::sqrt(nn) - 0.01 + 0.85 / std::sqrt(nn)) * d;
        if (k <= 0.302)
            p = 1.0;
        else if (k <= 0.5)
            p = 2.76773 - 19.828 * k + 80.709 * k * k - 138.55 * k * k * k + 81.218 * k * k * k * k;
        else if (k <= 0.9)
            p = -4.901232 + 40.662806 * k - 97.490286 * k * k + 94.029866 * k * k * k - 32.355711 * k * k * k * k;
        else if (k <= 1.31)
            p = 6.198765 - 19.558097 * k + 23.186922 * k * k - 12.234627 * k * k * k + 2.423045 * k * k * k * k;
        else
            p = 0.0;
    }
    return std::clamp(p, 0.0, 1.0);
}

/// CvM p-value under estimated mean and sd, from W^2 (1 + 0.5/n).
inline double cvm_composite_p(double w2, std::size_t n) {
    const double w = w2 * (1.0 + 0.5 / static_cast<double>(n));
    double p;
    if (w < 0.0275)
        p = 1.0 - std::exp(-13.953 + 775.5 * w - 12542.61 * w * w);
    else if (w < 0.051)
        p = 1.0 - std::exp(-5.903 + 179.546 * w - 1515.29 * w * w);
    else if (w < 0.092)
        p = std::exp(0.886 - 31.62 * w + 10.897 * w * w);
    else if (w < 1.1)
        p = std::exp(1.111 - 34.242 * w + 12.832 * w * w);
    else
        p = 7.37e-10;
    return std::clamp(p, 0.0, 1.0);
}

} // namespace gof_detail

/// Royston's algorithm (AS R94): approximate normal-scores coefficients and
/// a normalising transform of 1 - W for the p-value.
inline TestResult shapiro_wilk(std::span<const double> data) {
    const std::size_t n = data.size();
    if (n < 3 || n > 5000) throw size_error("shapiro_wilk: sample size must lie in [3, 5000]");
    const auto x = gof_detail::sorted_copy(data);
    const double an = static_cast<double>(n);

    auto poly = [](std::span<const double> cc, double v) {
        double r = cc[0];
        if (cc.size() > 1) {
            double p = v * cc[cc.size() - 1];
            for (std::size_t j = cc.size() - 2; j > 0; --j) p = (p + cc[j]) * v;
            r += p;
        }
        return r;
    };
    static constexpr std::array<double, 2> g = {-2.273, 0.459};
    static constexpr std::array<double, 6> c1 = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr std::array<double, 6> c2 = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr std::array<double, 4> c3 = {0.544, -0.39978, 0.025054, -6.714e-4};
    static constexpr std::array<double, 4> c4 = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr std::array<double, 4> c5 = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr std::array<double, 3> c6 = {-0.4803, -0.082676, 0.0030302};

    // Coefficients for the upper half; a[1..n/2], all positive.
    const std::size_t half = n / 2;
    std::vector<double> a(half + 1, 0.0);
    if (n == 3) {
        a[1] = std::sqrt(0.5);
    } else {
        const double an25 = an + 0.25;
        double summ2 = 0.0;
        for (std::size_t i = 1; i <= half; ++i) {
            a[i] = special::normal_quantile((static_cast<double>(i) - 0.375) / an25);
            summ2 += a[i] * a[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, rsn) - a[1] / ssumm2;
        std::size_t i1;
        double fac;
        if (n > 5) {
            i1 = 3;
            const double a2 = -a[2] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[2] = a2;
        } else {
            i1 = 2;
            fac = std::sqrt((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1));
        }
        a[1] = a1;
        for (std::size_t i = i1; i <= half; ++i) a[i] /= -fac;
    }

    const double range = x.back() - x.front();
    if (range < 1e-19) throw degenerate_error("shapiro_wilk: sample has zero range");

    // Coefficient attached to the i-th smallest observation (0-based).
    auto coef = [&](std::size_t i) {
        const std::size_t j = n - 1 - i;
        if (i == j) return 0.0;
        return i < j ? -a[i + 1] : a[j + 1];
    };
    double sa = 0.0, sx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sa += coef(i);
        sx += x[i] / range;
    }
    sa /= an;
    sx /= an;
    double ssa = 0.0, ssx = 0.0, sax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double asa = coef(i) - sa;
        const double xsx = x[i] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    // 1 - W, computed directly to keep precision when W is close to 1.
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = std::max(0.0, (ssassx - sax) * (ssassx + sax) / (ssa * ssx));
    const double w = 1.0 - w1;

    double pw;
    if (n == 3) {
        constexpr double pi6 = 1.90985931710274;  // 6/pi
        constexpr double stqr = 1.04719755119660; // pi/3
        pw = std::max(0.0, pi6 * (std::asin(std::sqrt(std::min(w, 1.0))) - stqr));
    } else if (w1 <= 0.0) {
        pw = 1.0;
    } else {
        double y = std::log(w1);
        double m, s;
        if (n <= 11) {
            const double gamma = poly(g, an);
            if (y >= gamma) return {w, 1e-99, TestKind::SW, n};
            y = -std::log(gamma - y);
            m = poly(c3, an);
            s = std::exp(poly(c4, an));
        } else {
            const double xx = std::log(an);
            m = poly(c5, xx);
            s = std::exp(poly(c6, xx));
        }
        pw = 1.0 - special::normal_cdf((y - m) / s);
    }
    return {w, std::clamp(pw, 0.0, 1.0), TestKind::SW, n};
}

/// Number of equiprobable cells used by the Pearson test.
inline std::size_t pearson_cells(std::size_t n) {
    return std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(2.0 * std::pow(static_cast<double>(n), 0.4))));
}

/// chi^2 = sum (O - E)^2 / E with E = n/m over equiprobable cells; p-value on
/// m - 3 degrees of freedom (two estimated parameters).
inline TestResult pearson_from_counts(std::span<const std::size_t> counts) {
    const std::size_t m = counts.size();
    if (m < 4) throw size_error("pearson: need at least four cells");
    const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    const double expected = static_cast<double>(n) / static_cast<double>(m);
    double chi2 = 0.0;
    for (std::size_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    return {chi2, special::chi2_sf(chi2, static_cast<double>(m - 3)), TestKind::Pearson, n};
}

inline double sample_mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator).
inline double sample_sd(std::span<const double> v) {
    const double mu = sample_mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Centre by the sample mean and scale by the sample sd.
inline std::vector<double> studentize(std::span<const double> data) {
    if (data.size() < 2) throw size_error("studentize: need at least two values");
    const double mu = sample_mean(data);
    const double sd = sample_sd(data);
    if (!(sd > 0.0)) throw degenerate_error("studentize: sample has zero variance");
    std::vector<double> z(data.size());
    std::transform(data.begin(), data.end(), z.begin(), [&](double x) { return (x - mu) / sd; });
    return z;
}

inline TestResult pearson_test(std::span<const double> data) {
    const std::size_t n = data.size();
    if (n < 20) throw size_error("pearson_test: need at least 20 values");
    const auto z = studentize(data);
    const std::size_t m = pearson_cells(n);
    std::vector<double> edges(m - 1);
    for (std::size_t j = 1; j < m; ++j) edges[j - 1] = special::normal_quantile(static_cast<double>(j) / m);
    std::vector<std::size_t> counts(m, 0);
    for (double v : z) ++counts[static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin())];
    return pearson_from_counts(counts);
}

using Battery = std::map<TestKind, TestResult>;

/// Studentize the values and test the result for normality with all four
/// tests, KS and CvM with p-values for estimated parameters.
inline Battery normality_battery(std::span<const double> estimates) {
    if (estimates.size() < 20) throw size_error("normality_battery: need at least 20 values");
    const auto z = studentize(estimates);
    Battery out;
    TestResult cvm = cvm_test(z, special::normal_cdf);
    cvm.p_value = gof_detail::cvm_composite_p(cvm.statistic, cvm.n);
    TestResult ks = ks_test(z, special::normal_cdf);
    ks.p_value = gof_detail::lilliefors_p(ks.statistic, ks.n);
    out[TestKind::CvM] = cvm;
    out[TestKind::KS] = ks;
    out[TestKind::SW] = shapiro_wilk(z);
    out[TestKind::Pearson] = pearson_test(z);
    return out;
}

} // namespace tailmean
