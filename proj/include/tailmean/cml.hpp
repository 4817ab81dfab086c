// cml.hpp
//
// Censored maximum likelihood estimation of the first- and second-order
// tail parameters (alpha, beta), the plug-in scale estimates (c, d), the
// bias-reduced quantile built on them, and the bias-reduced mean estimator
// with its asymptotic confidence interval.
//
// Notation: for the top-k relative excesses r_i = X(n-i+1,n) / X(n-k,n),
// L_i = log r_i and s1 = mean(L_i),
//
//   H(a)       = 1/a - s1
//   G_i(a, b)  = (a/b) (1 + g) r_i^(b-a) - g,   g = a b H(a) / (a - b)
//
// and (alpha, beta) solves
//
//   R1 = (1/k) sum 1/G_i - 1     = 0
//   R2 = (1/k) sum L_i/G_i - 1/b = 0,    subject to b > alpha_Hill.
//
// Along b = 1/s1 = alpha_Hill every G_i equals 1, so both residuals vanish
// identically there for any a. The system is also symmetric under
// (a, b) -> (b, a), and as b -> a both equations collapse to the same
// condition, leaving a ridge of spurious near-roots where the residuals
// vanish to second order. The solver divides the residuals by
// (b - alpha_Hill)(b - a)^2 / b^3 so Newton is drawn onto neither; the b^3
// keeps the scaled system from flattening out as b grows. Only when that
// fails does it retry without the b^3 shift, which can reach far roots.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "classic.hpp"
#include "empirical.hpp"
#include "error.hpp"
#include "special.hpp"

namespace tailmean {

struct CmlEstimate {
    double alpha_hat = 0.0;
    double beta_hat = 0.0;
    double c_hat = 0.0;
    double d_hat = 0.0;
    std::size_t k = 0;
    double hill_alpha = 0.0;
    double residual_norm = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
    /// True when the root came from the grid-search fallback.
    bool from_grid = false;
};

struct MeanEstimate {
    double mean_hat = 0.0;
    CmlEstimate cml;
    double sigma = 0.0;
    double std_err = 0.0;
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;
    double point = 0.0;
};

struct CmlOptions {
    double tolerance = 1e-8;       // residual sup-norm
    double step_floor = 1e-12;     // relative parameter step
    double fd_step = 1e-6;         // relative forward-difference step
    double boundary_tol = 1e-4;    // |beta - alpha_Hill| below this: boundary root
    double ridge_tol = 1e-3;       // (beta - alpha) / alpha below this: singular ridge
    double beta_cap = 0.0;         // roots with beta above beta_cap * alpha_Hill are rejected; 0 disables
    std::size_t max_iterations = 200;      // shared by all stages of one solve
    std::size_t first_attempt_iterations = 50;
    std::size_t grid_size = 40;
    double grid_alpha_lo = 0.5;    // multiples of alpha_Hill
    double grid_alpha_hi = 2.0;
    double grid_beta_lo = 1.01;
    double grid_beta_hi = 5.0;
};

inline double h_func(double alpha, const TailView &tv) { return 1.0 / alpha - tv.s1; }

inline double g_i(double alpha, double beta, double ratio, double h) {
    if (alpha == beta) throw singular_error("G_i is singular at beta = alpha");
    const double g = alpha * beta / (alpha - beta) * h;
    return (alpha / beta) * (1.0 + g) * std::pow(ratio, beta - alpha) - g;
}

namespace cml_detail {

struct Residuals {
    double r1 = 0.0;
    double r2 = 0.0;
    bool admissible = false;

    double sup() const { return std::max(std::abs(r1), std::abs(r2)); }
};

namespace power {

/// r_i^(b-a) computed from scratch.
struct Direct {
    double diff;
    double operator()(std::size_t, double ls) const { return std::exp(diff * ls); }
};

/// r_i^(b-a) recorded into a buffer for later reuse.
struct Recording {
    double diff;
    std::vector<double> *out;
    double operator()(std::size_t t, double ls) const { return (*out)[t] = std::exp(diff * ls); }
};

/// r_i^(b'-a') from a recorded r_i^(b-a) when the exponent moved by a tiny
/// delta: exp(delta L) by its Taylor polynomial, exact to rounding for
/// |delta L| <= 1e-3.
struct Shifted {
    double delta;
    const std::vector<double> *base;
    double operator()(std::size_t t, double ls) const {
        const double x = delta * ls;
        return (*base)[t] * (1.0 + x * (1.0 + x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)))));
    }
};

} // namespace power

template <class Power>
inline Residuals residuals_with(double alpha, double beta, const TailView &tv, Power pow_of) {
    Residuals out;
    if (!(alpha > 0.0) || !(beta > 0.0) || alpha == beta) return out;
    const double g = alpha * beta / (alpha - beta) * h_func(alpha, tv);
    const double lead = (alpha / beta) * (1.0 + g);
    double sum_inv = 0.0;
    double sum_log = 0.0;
    const auto &ls = tv.log_spacings;
    for (std::size_t t = 0; t < ls.size(); ++t) {
        const double gi = lead * pow_of(t, ls[t]) - g;
        if (!(gi > 0.0) || std::isnan(gi)) return out;
        const double inv = 1.0 / gi;
        sum_inv += inv;
        sum_log += ls[t] * inv;
    }
    const double k = static_cast<double>(tv.k);
    out.r1 = sum_inv / k - 1.0;
    out.r2 = sum_log / k - 1.0 / beta;
    out.admissible = std::isfinite(out.r1) && std::isfinite(out.r2);
    return out;
}

/// Residuals of the likelihood system. Not admissible when some G_i is not
/// a positive finite number.
inline Residuals residuals(double alpha, double beta, const TailView &tv) {
    return residuals_with(alpha, beta, tv, power::Direct{beta - alpha});
}

struct Deflated {
    std::array<double, 2> f{};
    Residuals raw;
    bool ok = false;
};

/// Residuals divided by (beta - alpha_Hill)(beta - alpha)^2, and by beta^3
/// in the shifted form. The first factor removes the trivial root line
/// beta = alpha_Hill, the second the ridge of degenerate roots of the
/// beta -> alpha limit.
enum class Deflation { Shifted, Plain };

inline double deflation(double alpha, double beta, double alpha_hill, Deflation mode) {
    const double d = (beta - alpha_hill) * (beta - alpha) * (beta - alpha);
    return mode == Deflation::Shifted ? d / (beta * beta * beta) : d;
}

template <class Power>
inline Deflated deflated_with(double alpha, double beta, const TailView &tv, double alpha_hill, Power pow_of,
                              Deflation mode = Deflation::Shifted) {
    Deflated d;
    if (!(beta > alpha_hill)) return d;
    d.raw = residuals_with(alpha, beta, tv, pow_of);
    if (!d.raw.admissible) return d;
    const double scale = deflation(alpha, beta, alpha_hill, mode);
    d.f = {d.raw.r1 / scale, d.raw.r2 / scale};
    d.ok = std::isfinite(d.f[0]) && std::isfinite(d.f[1]);
    return d;
}

inline Deflated deflated(double alpha, double beta, const TailView &tv, double alpha_hill,
                         Deflation mode = Deflation::Shifted) {
    return deflated_with(alpha, beta, tv, alpha_hill, power::Direct{beta - alpha}, mode);
}

inline double norm2(const std::array<double, 2> &v) { return std::hypot(v[0], v[1]); }

struct NewtonResult {
    double alpha = 0.0;
    double beta = 0.0;
    Residuals raw;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Damped Newton on the deflated residuals with a forward-difference
/// Jacobian, limited to `budget` iterations.
inline NewtonResult newton(double alpha, double beta, const TailView &tv, double alpha_hill,
                           const CmlOptions &opt, std::size_t budget, Deflation mode = Deflation::Shifted) {
    NewtonResult res{alpha, beta, {}, 0, false};
    std::vector<double> pow_cur(tv.k), pow_trial(tv.k);
    Deflated cur = deflated_with(alpha, beta, tv, alpha_hill, power::Recording{beta - alpha, &pow_cur}, mode);
    if (!cur.ok) return res;
    res.raw = cur.raw;
    const double max_ls = tv.log_spacings.empty() ? 0.0 : *std::max_element(tv.log_spacings.begin(), tv.log_spacings.end());

    auto probe = [&](double a, double b) {
        const double delta = (b - a) - (res.beta - res.alpha);
        if (std::abs(delta) * max_ls <= 1e-3)
            return deflated_with(a, b, tv, alpha_hill, power::Shifted{delta, &pow_cur}, mode);
        return deflated(a, b, tv, alpha_hill, mode);
    };

    while (res.iterations < budget) {
        if (cur.raw.sup() <= opt.tolerance) {
            res.converged = true;
            break;
        }
        ++res.iterations;

        const std::array<double, 2> p{res.alpha, res.beta};
        double jac[2][2];
        bool jac_ok = true;
        for (int j = 0; j < 2 && jac_ok; ++j) {
            std::array<double, 2> q = p;
            const double h = opt.fd_step * std::max(std::abs(q[j]), 1e-3);
            q[j] += h;
            const Deflated dq = probe(q[0], q[1]);
            if (dq.ok) {
                jac[0][j] = (dq.f[0] - cur.f[0]) / h;
                jac[1][j] = (dq.f[1] - cur.f[1]) / h;
                continue;
            }
            // Step backwards when the forward point leaves the domain.
            q[j] = p[j] - h;
            const Deflated db = probe(q[0], q[1]);
            if (!db.ok) {
                jac_ok = false;
                break;
            }
            jac[0][j] = (cur.f[0] - db.f[0]) / h;
            jac[1][j] = (cur.f[1] - db.f[1]) / h;
        }
        if (!jac_ok) break;
        const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if (!std::isfinite(det) || det == 0.0) break;
        const double da = -(jac[1][1] * cur.f[0] - jac[0][1] * cur.f[1]) / det;
        const double db = -(-jac[1][0] * cur.f[0] + jac[0][0] * cur.f[1]) / det;

        const double base = norm2(cur.f);
        double lambda = 1.0;
        bool accepted = false;
        while (lambda >= 1.0 / 1024.0) {
            const double na = res.alpha + lambda * da;
            const double nb = res.beta + lambda * db;
            const Deflated trial =
                deflated_with(na, nb, tv, alpha_hill, power::Recording{nb - na, &pow_trial}, mode);
            if (trial.ok && norm2(trial.f) < base) {
                const double step = std::max(std::abs(na - res.alpha) / std::abs(res.alpha),
                                             std::abs(nb - res.beta) / std::abs(res.beta));
                res.alpha = na;
                res.beta = nb;
                cur = trial;
                res.raw = trial.raw;
                std::swap(pow_cur, pow_trial);
                accepted = true;
                if (step < opt.step_floor && cur.raw.sup() > opt.tolerance) return res;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    if (cur.raw.sup() <= opt.tolerance) res.converged = true;
    return res;
}

/// Accept a converged root, mapping a beta < alpha root to its mirror image
/// (the system is symmetric in (alpha, beta)). Roots on the constraint
/// boundary beta ~ alpha_Hill or on the singular ridge beta ~ alpha are
/// rejected.
inline bool accept(NewtonResult &r, const TailView &tv, double alpha_hill, const CmlOptions &opt, bool capped) {
    if (!r.converged) return false;
    if (r.beta < r.alpha) {
        std::swap(r.alpha, r.beta);
        r.raw = residuals(r.alpha, r.beta, tv);
        if (!r.raw.admissible || r.raw.sup() > opt.tolerance) return false;
    }
    if (!(r.alpha > 0.0)) return false;
    if (!(r.beta - alpha_hill > opt.boundary_tol)) return false;
    if (!(r.beta - r.alpha > opt.ridge_tol * r.alpha)) return false;
    if (capped && opt.beta_cap > 0.0 && !(r.beta <= opt.beta_cap * alpha_hill)) return false;
    return true;
}

struct Cell {
    double norm, alpha, beta;
};

/// Deflated residual norm at every admissible grid node, best first. Uses
/// r^(b-a) = r^b * r^(-a) so only 2m exponential sweeps are needed instead
/// of m^2.
inline std::vector<Cell> rank_grid(const TailView &tv, double alpha_hill, const std::vector<double> &grid_a,
                                   const std::vector<double> &grid_b, const CmlOptions &opt,
                                   Deflation mode = Deflation::Shifted) {
    const std::size_t k = tv.k;
    const auto &ls = tv.log_spacings;
    std::vector<double> pow_neg_a(grid_a.size() * k), pow_b(grid_b.size() * k);
    for (std::size_t i = 0; i < grid_a.size(); ++i)
        for (std::size_t t = 0; t < k; ++t) pow_neg_a[i * k + t] = std::exp(-grid_a[i] * ls[t]);
    for (std::size_t j = 0; j < grid_b.size(); ++j)
        for (std::size_t t = 0; t < k; ++t) pow_b[j * k + t] = std::exp(grid_b[j] * ls[t]);

    std::vector<Cell> cells;
    cells.reserve(grid_a.size() * grid_b.size());
    const double kk = static_cast<double>(k);
    for (std::size_t i = 0; i < grid_a.size(); ++i) {
        const double a = grid_a[i];
        const double h = h_func(a, tv);
        for (std::size_t j = 0; j < grid_b.size(); ++j) {
            const double b = grid_b[j];
            if (b - a <= opt.ridge_tol * a || !(b > alpha_hill)) continue;
            const double g = a * b / (a - b) * h;
            const double lead = (a / b) * (1.0 + g);
            // Branch-free so the loop vectorizes; admissibility is checked
            // once at the end through the smallest G_i.
            const double *pb = &pow_b[j * k];
            const double *pa = &pow_neg_a[i * k];
            double si[4] = {0, 0, 0, 0}, sl[4] = {0, 0, 0, 0};
            double min_g = std::numeric_limits<double>::infinity();
            std::size_t t = 0;
            for (; t + 4 <= k; t += 4) {
                for (std::size_t u = 0; u < 4; ++u) {
                    const double gi = lead * pb[t + u] * pa[t + u] - g;
                    min_g = std::min(min_g, gi);
                    const double inv = 1.0 / gi;
                    si[u] += inv;
                    sl[u] += ls[t + u] * inv;
                }
            }
            for (; t < k; ++t) {
                const double gi = lead * pb[t] * pa[t] - g;
                min_g = std::min(min_g, gi);
                const double inv = 1.0 / gi;
                si[0] += inv;
                sl[0] += ls[t] * inv;
            }
            const double sum_inv = (si[0] + si[1]) + (si[2] + si[3]);
            const double sum_log = (sl[0] + sl[1]) + (sl[2] + sl[3]);
            if (!(min_g > 0.0) || !std::isfinite(sum_inv) || !std::isfinite(sum_log)) continue;
            const double scale = deflation(a, b, alpha_hill, mode);
            const double f1 = (sum_inv / kk - 1.0) / scale;
            const double f2 = (sum_log / kk - 1.0 / b) / scale;
            const double nrm = std::hypot(f1, f2);
            if (std::isfinite(nrm)) cells.push_back({nrm, a, b});
        }
    }
    std::sort(cells.begin(), cells.end(), [](const Cell &x, const Cell &y) {
        if (x.norm != y.norm) return x.norm < y.norm;
        return x.alpha < y.alpha || (x.alpha == y.alpha && x.beta < y.beta);
    });
    return cells;
}

} // namespace cml_detail

/// Solve the likelihood system on a tail view. Never throws for solver
/// failure: the returned estimate carries `converged = false` instead.
/// c_hat and d_hat are left at zero; see chat_dhat.
inline CmlEstimate cml_fit(const TailView &tv, const CmlOptions &opt = {}) {
    if (tv.k < 2) throw index_error("cml_fit: need at least two upper order statistics");
    const double ah = hill(tv);

    CmlEstimate est;
    est.k = tv.k;
    est.hill_alpha = ah;

    std::size_t used = 0;
    auto finish = [&](const cml_detail::NewtonResult &r, bool grid) {
        est.alpha_hat = r.alpha;
        est.beta_hat = r.beta;
        est.residual_norm = r.raw.sup();
        est.converged = true;
        est.from_grid = grid;
    };

    auto first = cml_detail::newton(ah, 2.0 * ah, tv, ah, opt, std::min(opt.first_attempt_iterations, opt.max_iterations));
    used += first.iterations;
    if (cml_detail::accept(first, tv, ah, opt, false)) {
        finish(first, false);
        est.iterations = used;
        return est;
    }

    // Fallback: rank a coarse grid by deflated residual norm and polish the
    // best cells until one converges or the iteration budget runs out.
    const std::size_t m = std::max<std::size_t>(opt.grid_size, 2);
    std::vector<double> grid_a(m), grid_b(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(m - 1);
        grid_a[i] = ah * (opt.grid_alpha_lo + (opt.grid_alpha_hi - opt.grid_alpha_lo) * t);
        grid_b[i] = ah * (opt.grid_beta_lo + (opt.grid_beta_hi - opt.grid_beta_lo) * t);
    }
    const auto cells = cml_detail::rank_grid(tv, ah, grid_a, grid_b, opt);

    double best_norm = first.raw.admissible ? first.raw.sup() : std::numeric_limits<double>::infinity();
    cml_detail::NewtonResult best = first;
    for (const cml_detail::Cell &c : cells) {
        if (used >= opt.max_iterations) break;
        auto r = cml_detail::newton(c.alpha, c.beta, tv, ah, opt, opt.max_iterations - used);
        used += std::max<std::size_t>(r.iterations, 1);
        if (cml_detail::accept(r, tv, ah, opt, true)) {
            finish(r, true);
            est.iterations = used;
            return est;
        }
        if (r.raw.admissible && r.raw.sup() < best_norm) {
            best_norm = r.raw.sup();
            best = r;
        }
    }

    // Last resort: the unshifted deflation, with a budget of its own.
    {
        std::size_t used2 = 0;
        auto r = cml_detail::newton(ah, 2.0 * ah, tv, ah, opt, opt.max_iterations, cml_detail::Deflation::Plain);
        used2 += r.iterations;
        if (cml_detail::accept(r, tv, ah, opt, false)) {
            finish(r, false);
            est.iterations = used + used2;
            return est;
        }
        const auto cells2 = cml_detail::rank_grid(tv, ah, grid_a, grid_b, opt, cml_detail::Deflation::Plain);
        for (const cml_detail::Cell &c : cells2) {
            if (used2 >= opt.max_iterations) break;
            auto r2 = cml_detail::newton(c.alpha, c.beta, tv, ah, opt, opt.max_iterations - used2, cml_detail::Deflation::Plain);
            used2 += std::max<std::size_t>(r2.iterations, 1);
            if (cml_detail::accept(r2, tv, ah, opt, true)) {
                finish(r2, true);
                est.iterations = used + used2;
                return est;
            }
        }
    }

    est.alpha_hat = best.alpha;
    est.beta_hat = best.beta;
    est.residual_norm = best_norm;
    est.iterations = used;
    est.converged = false;
    return est;
}

/// Plug-in estimates of c and d:
///   c = (ab/(a-b)) (k/n) X(n-k,n)^a (1/b - s1)
///   d = (ab/(b-a)) (k/n) X(n-k,n)^b (1/a - s1)
inline std::pair<double, double> chat_dhat(const TailView &tv, std::size_t n, double alpha_hat, double beta_hat) {
    if (alpha_hat == beta_hat) throw singular_error("chat_dhat: beta_hat equals alpha_hat");
    if (!(tv.threshold > 0.0)) throw domain_error("chat_dhat: threshold must be positive");
    const double frac = static_cast<double>(tv.k) / static_cast<double>(n);
    const double ab = alpha_hat * beta_hat;
    const double c = ab / (alpha_hat - beta_hat) * frac * std::pow(tv.threshold, alpha_hat) * (1.0 / beta_hat - tv.s1);
    const double d = ab / (beta_hat - alpha_hat) * frac * std::pow(tv.threshold, beta_hat) * (1.0 / alpha_hat - tv.s1);
    if (!(c > 0.0)) throw invalid_estimate_error("chat_dhat: estimated scale c_hat is not positive");
    return {c, d};
}

inline CmlEstimate cml_solve(const TailView &tv, const CmlOptions &opt = {}) {
    CmlEstimate est = cml_fit(tv, opt);
    if (!est.converged)
        throw convergence_error("CML system: no admissible root found (best residual " +
                                std::to_string(est.residual_norm) + ")");
    const auto [c, d] = chat_dhat(tv, tv.n, est.alpha_hat, est.beta_hat);
    est.c_hat = c;
    est.d_hat = d;
    return est;
}

inline CmlEstimate cml_solve(const SortedSample &sample, std::size_t k, const CmlOptions &opt = {}) {
    if (k < 2) throw index_error("cml_solve: k must be at least 2");
    return cml_solve(tail_view(sample, k), opt);
}

/// Bias-reduced high quantile Q(1-s) from the second-order expansion.
inline double lpy_quantile(double c_hat, double d_hat, double alpha_hat, double beta_hat, double s) {
    if (!(s > 0.0 && s < 1.0)) throw domain_error("lpy_quantile: s must lie in (0,1)");
    if (!(alpha_hat > 0.0) || !(c_hat > 0.0)) throw domain_error("lpy_quantile: need c_hat > 0 and alpha_hat > 0");
    if (!std::isfinite(d_hat)) throw domain_error("lpy_quantile: d_hat is not finite");
    const double lead = std::pow(c_hat, 1.0 / alpha_hat) * std::pow(s, -1.0 / alpha_hat);
    // Combined in logs: d_hat and c_hat^(-b/a) can overflow in opposite directions.
    const double log_corr = std::log(std::abs(d_hat) / alpha_hat) - beta_hat / alpha_hat * std::log(c_hat) +
                            (beta_hat / alpha_hat - 1.0) * std::log(s);
    const double corr = d_hat == 0.0 ? 0.0 : std::copysign(std::exp(log_corr), d_hat);
    return lead * (1.0 + corr);
}

/// Asymptotic variance of the bias-reduced mean estimator.
inline double sigma2(double alpha, double beta) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw domain_error("sigma2: alpha must lie in (1,2)");
    if (!(beta > alpha)) throw domain_error("sigma2: beta must exceed alpha");
    const double am1 = alpha - 1.0;
    const double amb = alpha - beta;
    const double am1_2 = am1 * am1;
    const double amb_2 = amb * amb;
    const double b2 = beta * beta;
    return alpha * alpha * b2 * b2 / (am1_2 * am1_2 * amb_2 * amb_2) + 2.0 / (2.0 - alpha) +
           2.0 * alpha * b2 / (am1_2 * amb_2);
}

namespace cml_detail {

/// Upper-tail part of the bias-reduced mean, i.e. the integral of the LPY
/// quantile over (0, k/n). Written with c = A (k/n) X^a and d = D (k/n) X^b
/// so that large beta_hat cannot overflow X^b or c^(-b/a):
///   (k/n) A^(1/a) X [ a/(a-1) + D A^(-b/a) / (b-1) ].
inline double tail_integral(const TailView &tv, double alpha, double beta) {
    const double frac = static_cast<double>(tv.k) / static_cast<double>(tv.n);
    const double A = alpha * beta / (alpha - beta) * (1.0 / beta - tv.s1);
    const double D = alpha * beta / (beta - alpha) * (1.0 / alpha - tv.s1);
    const double second = D * std::exp(-(beta / alpha) * std::log(A)) / (beta - 1.0);
    return frac * std::pow(A, 1.0 / alpha) * tv.threshold * (alpha / (alpha - 1.0) + second);
}

inline MeanEstimate br_mean_from(const SortedSample &sample, const TailView &tv, const CmlEstimate &cml) {
    const double a = cml.alpha_hat;
    const double b = cml.beta_hat;
    if (!(a > 1.0)) throw infinite_mean_error("bias-reduced mean undefined: alpha_hat <= 1");
    if (!(b > a)) throw infinite_mean_error("bias-reduced mean undefined: beta_hat <= alpha_hat");

    MeanEstimate est;
    est.cml = cml;
    est.mean_hat = tail_integral(tv, a, b) + lower_tail_mean(sample, tv.k);
    if (!std::isfinite(est.mean_hat)) throw invalid_estimate_error("bias-reduced mean is not finite");
    if (a < 2.0) {
        const double n = static_cast<double>(tv.n);
        const double frac = static_cast<double>(tv.k) / n;
        est.sigma = std::sqrt(sigma2(a, b));
        est.std_err = std::sqrt(frac) * est.sigma * std::pow(cml.c_hat / frac, 1.0 / a) / std::sqrt(n);
    } else {
        est.sigma = std::numeric_limits<double>::quiet_NaN();
        est.std_err = std::numeric_limits<double>::quiet_NaN();
    }
    return est;
}

} // namespace cml_detail

/// Bias-reduced mean: integral of the LPY quantile over (0, k/n) plus the
/// empirical part (1/n) sum_{i>k} X(n-i+1,n).
inline MeanEstimate br_mean(const SortedSample &sample, std::size_t k, const CmlOptions &opt = {}) {
    const TailView tv = tail_view(sample, k);
    return cml_detail::br_mean_from(sample, tv, cml_solve(tv, opt));
}

inline ConfidenceInterval confidence_interval(const MeanEstimate &est, std::size_t k, std::size_t n, double level) {
    if (!(level > 0.0 && level < 1.0)) throw domain_error("confidence level must lie in (0,1)");
    if (!std::isfinite(est.mean_hat)) throw domain_error("confidence_interval: estimate is not finite");
    if (k == 0 || k >= n) throw index_error("confidence_interval: need 1 <= k < n");
    const double a = est.cml.alpha_hat;
    if (!(a > 1.0 && a < 2.0))
        throw invalid_estimate_error("confidence_interval: asymptotic variance needs 1 < alpha_hat < 2");
    const double nn = static_cast<double>(n);
    const double frac = static_cast<double>(k) / nn;
    const double sigma = std::sqrt(sigma2(a, est.cml.beta_hat));
    const double se = std::sqrt(frac) * sigma * std::pow(est.cml.c_hat / frac, 1.0 / a) / std::sqrt(nn);
    if (!std::isfinite(se)) throw invalid_estimate_error("confidence_interval: standard error is not finite");
    const double z = special::normal_quantile(0.5 * (1.0 + level));
    return ConfidenceInterval{est.mean_hat - z * se, est.mean_hat + z * se, level, est.mean_hat};
}

} // namespace tailmean
