// empirical.hpp
//
// Order statistics and the pieces of them every tail estimator consumes.
// Indices follow the usual 1-based convention X(1,n) <= ... <= X(n,n).

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"

namespace tailmean {

/// Strictly positive observations held in ascending order.
class SortedSample {
public:
    explicit SortedSample(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw size_error("sample must contain at least one observation");
        for (double v : values_) {
            if (!std::isfinite(v)) throw data_error("sample contains a non-finite value");
            if (v <= 0.0) throw data_error("sample contains a nonpositive value");
        }
        std::sort(values_.begin(), values_.end());
    }

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }

    /// X(i,n), 1 <= i <= n.
    double order_stat(std::size_t i) const {
        if (i < 1 || i > values_.size())
            throw index_error("order statistic index " + std::to_string(i) + " outside [1, " +
                              std::to_string(values_.size()) + "]");
        return values_[i - 1];
    }

    /// X(n-i+1,n): the i-th largest observation, 1 <= i <= n.
    double upper(std::size_t i) const { return order_stat(values_.size() - i + 1); }

    SortedSample scaled(double c) const {
        if (!(c > 0.0)) throw domain_error("scale factor must be positive");
        std::vector<double> v(values_);
        for (double &x : v) x *= c;
        return SortedSample(std::move(v));
    }

    double mean() const {
        return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(size());
    }

private:
    std::vector<double> values_;
};

/// The top-k relative excesses over the threshold X(n-k,n).
struct TailView {
    std::size_t k = 0;
    std::size_t n = 0;
    double threshold = 0.0;
    /// log(X(n-i+1,n) / X(n-k,n)) for i = 1..k (largest first).
    std::vector<double> log_spacings;
    /// Mean of log_spacings.
    double s1 = 0.0;
};

inline double order_stat(const SortedSample &sample, std::size_t i) { return sample.order_stat(i); }

/// Q_n(p) = inf{x : F_n(x) >= p} = X(ceil(np), n).
inline double empirical_quantile(const SortedSample &sample, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw domain_error("empirical_quantile: p must lie in (0,1]");
    const double n = static_cast<double>(sample.size());
    const double x = n * p;
    const double r = std::round(x);
    // i/n * n may land an ulp above i; treat that as exactly i.
    const double idx = (std::abs(x - r) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x))
                           ? r
                           : std::ceil(x);
    return sample.order_stat(static_cast<std::size_t>(std::clamp(idx, 1.0, n)));
}

inline TailView tail_view(const SortedSample &sample, std::size_t k) {
    const std::size_t n = sample.size();
    if (k < 1 || k >= n)
        throw index_error("tail size k=" + std::to_string(k) + " must satisfy 1 <= k < n=" + std::to_string(n));
    TailView tv;
    tv.k = k;
    tv.n = n;
    tv.threshold = sample.order_stat(n - k);
    if (!(tv.threshold > 0.0)) throw domain_error("tail threshold must be strictly positive");
    tv.log_spacings.resize(k);
    const double log_t = std::log(tv.threshold);
    double sum = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
        const double ls = std::log(sample.upper(i)) - log_t;
        tv.log_spacings[i - 1] = ls;
        sum += ls;
    }
    tv.s1 = sum / static_cast<double>(k);
    return tv;
}

/// (1/n) * sum of the n-k smallest observations.
inline double lower_tail_mean(const SortedSample &sample, std::size_t k) {
    const std::size_t n = sample.size();
    if (k >= n) throw index_error("lower_tail_mean: k must be smaller than n");
    const auto v = sample.values();
    return std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n - k), 0.0) /
           static_cast<double>(n);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view s, double &out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace detail

/// Parse a single-column list of values; the first line may be the header
/// `value`. Blank lines are ignored.
inline std::vector<double> read_values(std::istream &in, bool require_positive) {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto field = detail::trim(line);
        if (field.empty()) continue;
        if (line_no == 1 && field == "value") continue;
        double v = 0.0;
        if (!detail::parse_double(field, v) || !std::isfinite(v))
            throw data_error("line " + std::to_string(line_no) + ": malformed value '" + std::string(field) + "'");
        if (require_positive && v <= 0.0)
            throw data_error("line " + std::to_string(line_no) + ": value must be strictly positive");
        values.push_back(v);
    }
    if (values.empty()) throw data_error("input contains no values");
    return values;
}

inline SortedSample read_sample(std::istream &in) { return SortedSample(read_values(in, true)); }

} // namespace tailmean
