#pragma once

#include <boost/multiprecision/cpp_complex.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "mfunc/common.hpp"
#include "mfunc/local.hpp"

namespace mfunc {

// Taylor coefficients G_a of exp(i x * local log term) as a power series in
// the inverse-root parameter t:
//   G_0 = 1,   G_a = p^(-a sigma) / a! * prod_{j=0}^{a-1} (ix + j)   (a >= 1),
// generated by the recurrence G_a = G_{a-1} (ix + a - 1) p^(-sigma) / a.
// The rising-factorial form follows from (1 - w)^(-ix) = exp(-ix log(1 - w));
// tests validate it against the defining composition sums for small a.
struct GCoeffTable {
    LocalParams params;
    double x = 0.0;
    int a_max = 0;
    std::vector<complex> coeffs;
    double tail_bound = 0.0;  // bound on sum_{a > a_max} p^(-a sigma) G_a(|x|)
};

// Majorant G_a(x) = sum_{n=1}^{a} x^n / n! * C(a-1, n-1) for a >= 1, G_0 = 1.
// All terms are positive; forward accumulation is stable.
inline double g_majorant(int a, double x_abs) {
    if (a < 0) throw validation_error("majorant index must be non-negative");
    if (!(x_abs >= 0.0)) throw validation_error("majorant argument must be non-negative");
    if (a == 0) return 1.0;
    double term = x_abs;  // n = 1
    double sum = term;
    for (int n = 2; n <= a; ++n) {
        term *= x_abs * static_cast<double>(a - n + 1) /
                (static_cast<double>(n) * static_cast<double>(n - 1));
        sum += term;
    }
    return sum;
}

namespace detail {

// log G_a(X) <= min_w [X w/(1-w) - a log w]  (coefficients of
// exp(X w/(1-w)) are non-negative).  The minimizing w solves
// a w^2 - (2a + X) w + a = 0; the stable small root is used.
inline double chernoff_log_majorant(double a, double x_abs) {
    if (a <= 0.0) return 0.0;
    if (x_abs <= 0.0) return -1e300;  // G_a(0) = 0 for a >= 1
    const double c = 2.0 * a + x_abs;
    const double w = 2.0 * a / (c + std::sqrt(c * c - 4.0 * a * a));
    return x_abs * w / (1.0 - w) - a * std::log(w);
}

// Peak natural log over b of the true pair-sum term modulus
//   p^(-(2b+nu) sigma) |(ix)_{b+nu}| / (b+nu)! * |(ix)_b| / b!
// with |(ix)_a| = prod_{j<a} sqrt(x^2 + j^2).  This is what limits the
// working precision; the positive-coefficient majorant overshoots it badly
// at large |x|.
inline double pair_sum_peak_log(const LocalParams& lp, double x, int nu) {
    const double X = std::abs(x);
    if (X == 0.0) return 0.0;
    const double lp_log = lp.sigma * std::log(static_cast<double>(lp.p));
    const double p2s = std::exp(2.0 * lp.sigma * std::log(static_cast<double>(lp.p)));
    const double b_star = X / std::sqrt(std::max(p2s - 1.0, 1e-12));
    const long b_hi = static_cast<long>(3.0 * (b_star + 16.0));
    // running sums: rising[m] = log |(ix)_m|, built incrementally
    double rising_b = 0.0;       // log |(ix)_b|
    double rising_bnu = 0.0;     // log |(ix)_{b+nu}|
    for (int j = 0; j < nu; ++j) rising_bnu += 0.5 * std::log(X * X + double(j) * j);
    double peak = 0.0;
    for (long b = 0; b <= b_hi; ++b) {
        const double v = -(2.0 * double(b) + nu) * lp_log + rising_b + rising_bnu -
                         std::lgamma(double(b) + 1.0) - std::lgamma(double(b + nu) + 1.0);
        if (v > peak) peak = v;
        rising_b += 0.5 * std::log(X * X + double(b) * double(b));
        rising_bnu += 0.5 * std::log(X * X + double(b + nu) * double(b + nu));
    }
    return peak;
}

inline int digits_for(double peak_log10, double tol, long terms) {
    const double tol10 = std::max(0.0, -std::log10(std::max(tol, 1e-300)));
    return static_cast<int>(std::ceil(std::max(0.0, peak_log10) + tol10 +
                                      std::log10(static_cast<double>(terms) + 8.0))) +
           2;
}

inline int pair_sum_digits_needed(const LocalParams& lp, double x, int nu, double tol,
                                  long terms) {
    return digits_for(pair_sum_peak_log(lp, x, nu) / std::log(10.0), tol, terms);
}

struct PairSumPlan {
    long terms = 0;        // sum b = 0 .. terms
    double tail_bound = 0.0;
};

// Truncation point with a certified geometric tail:
//   sum_{b > B} p^(-(2b+nu) sigma) G_{b+nu}(X) G_b(X)
//     <= f(w)^2 (a/w)^nu g^(B+1) / (1 - g),   g = (a/w)^2,  f(w) = exp(X w/(1-w)),
// minimized over a grid of w in (p^(-sigma), 1).
inline PairSumPlan pair_sum_plan(const LocalParams& lp, double x, int nu, double tail_target) {
    const double X = std::abs(x);
    const double a = lp.a;
    if (!(a < 1.0)) throw std::logic_error("majorant ratio not contractive");
    const double log_target = std::log(std::max(tail_target, 1e-300));
    PairSumPlan best;
    best.terms = -1;
    for (int i = 1; i <= 24; ++i) {
        const double w = a + (1.0 - a) * static_cast<double>(i) / 25.0;
        const double g = (a / w) * (a / w);
        if (!(g < 1.0)) continue;
        const double log_c = 2.0 * X * w / (1.0 - w) + nu * std::log(a / w) - std::log1p(-g);
        // smallest B with log_c + (B+1) log g <= log_target
        const double need = (log_target - log_c) / std::log(g) - 1.0;
        long b = need <= 0.0 ? 0 : static_cast<long>(std::ceil(need));
        b = std::max<long>(b, 4);
        if (best.terms < 0 || b < best.terms) {
            best.terms = b;
            best.tail_bound = std::exp(log_c + (static_cast<double>(b) + 1.0) * std::log(g));
        }
    }
    if (best.terms < 0) throw std::logic_error("pair-sum truncation plan failed");
    return best;
}

template <typename C>
struct PairSumRaw {
    complex value;
    double peak_abs = 0.0;
};

// The pair sum S(nu) = sum_{b=0}^{B} G_{b+nu} G_b evaluated in the complex
// type C.  Terms can exceed the result by many orders of magnitude; the
// caller chooses C with enough digits to absorb the cancellation.
// k indexes the coefficient currently produced; G_k pairs with G_{k-nu},
// which sits nu steps back in a ring buffer of size nu + 1.
template <typename C>
PairSumRaw<C> pair_sum_eval(const LocalParams& lp, double x, int nu, long b_max) {
    using R = typename C::value_type;
    const R ap = pow(R(lp.p), static_cast<R>(-lp.sigma));
    const C ix(R(0), R(x));
    const long ring = nu + 1;
    std::vector<C> lag(static_cast<std::size_t>(ring), C(R(0)));
    C g_prev(R(1));
    C sum(R(0));
    double peak = 0.0;
    const long k_max = b_max + nu;
    for (long k = 0; k <= k_max; ++k) {
        C g_k = (k == 0) ? C(R(1)) : C(g_prev * (ix + R(k - 1)) * ap / R(k));
        g_prev = g_k;
        if (k >= nu) {
            const C term = (nu == 0) ? C(g_k * g_k)
                                     : C(g_k * lag[static_cast<std::size_t>((k - nu) % ring)]);
            sum += term;
            const double mag = static_cast<double>(abs(term));
            if (mag > peak) peak = mag;
        }
        lag[static_cast<std::size_t>(k % ring)] = g_k;
    }
    PairSumRaw<C> out;
    out.value = complex{static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
    out.peak_abs = peak;
    return out;
}

template <>
inline PairSumRaw<complex> pair_sum_eval<complex>(const LocalParams& lp, double x, int nu,
                                                  long b_max) {
    const complex ix{0.0, x};
    const long ring = nu + 1;
    std::vector<complex> lag(static_cast<std::size_t>(ring), complex{0.0, 0.0});
    complex g_prev{1.0, 0.0};
    complex sum{0.0, 0.0};
    double peak = 0.0;
    const long k_max = b_max + nu;
    for (long k = 0; k <= k_max; ++k) {
        const complex g_k = (k == 0) ? complex{1.0, 0.0}
                                     : g_prev * (ix + static_cast<double>(k - 1)) * lp.a /
                                           static_cast<double>(k);
        g_prev = g_k;
        if (k >= nu) {
            const complex term =
                (nu == 0) ? g_k * g_k : g_k * lag[static_cast<std::size_t>((k - nu) % ring)];
            sum += term;
            peak = std::max(peak, std::abs(term));
        }
        lag[static_cast<std::size_t>(k % ring)] = g_k;
    }
    return {sum, peak};
}

}  // namespace detail

inline GCoeffTable g_coeff_table(const LocalParams& lp, double x, int a_max) {
    if (a_max < 0) throw validation_error("coefficient count must be non-negative");
    GCoeffTable table{lp, x, a_max, {}, 0.0};
    table.coeffs.reserve(static_cast<std::size_t>(a_max) + 1);
    complex g{1.0, 0.0};
    table.coeffs.push_back(g);
    const complex ix{0.0, x};
    int last = 0;
    for (int a = 1; a <= a_max; ++a) {
        g = g * (ix + static_cast<double>(a - 1)) * lp.a / static_cast<double>(a);
        if (std::abs(g) < 1e-300 && a > 1) break;  // underflow: truncate, tail still bounded
        table.coeffs.push_back(g);
        last = a;
    }
    table.a_max = last;
    // tail over a > last of p^(-a sigma) G_a(|x|), via the generating function
    const double X = std::abs(x);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 24; ++i) {
        const double w = lp.a + (1.0 - lp.a) * static_cast<double>(i) / 25.0;
        const double rho = lp.a / w;
        if (!(rho < 1.0)) continue;
        const double log_tail = X * w / (1.0 - w) +
                                (static_cast<double>(last) + 1.0) * std::log(rho) -
                                std::log1p(-rho);
        best = std::min(best, std::exp(log_tail));
    }
    table.tail_bound = best;
    return table;
}

// G_{p,x}(nu) = sum_{b >= 0} G_{b+nu}(p,x) G_b(p,x)  (complex products, not
// squared moduli).  Truncated when the certified majorant tail drops below
// tol; the working precision is chosen from the peak term size so rounding in
// the cancelling sum stays below tol as well.
inline certified_complex g_pair_sum(int nu, const LocalParams& lp, double x, double tol) {
    if (!(tol > 0.0)) throw validation_error("tolerance must be positive");
    if (nu < 0) throw validation_error("pair-sum index must be non-negative");
    if (x == 0.0) return {complex{nu == 0 ? 1.0 : 0.0, 0.0}, 0.0};

    const auto plan = detail::pair_sum_plan(lp, x, nu, 0.5 * tol);
    const double fudge = static_cast<double>(plan.terms) + 8.0;

    // First pass in doubles.  The measured peak term tells us whether the
    // cancellation exceeded what double precision can absorb; if so, rerun in
    // a wide-enough tier.  Overflowing peaks fall back to the analytic
    // estimate.
    auto raw = detail::pair_sum_eval<complex>(lp, x, nu, plan.terms);
    double round_err = raw.peak_abs * 2.2e-16 * fudge;
    if (std::isfinite(raw.peak_abs) && round_err <= 0.5 * tol) {
        return {raw.value, plan.tail_bound + round_err};
    }
    int digits;
    if (std::isfinite(raw.peak_abs)) {
        digits = detail::digits_for(std::log10(std::max(raw.peak_abs, 1.0)), 0.5 * tol,
                                    plan.terms);
    } else {
        digits = detail::pair_sum_digits_needed(lp, x, nu, 0.5 * tol, plan.terms);
    }
    if (digits <= 46) {
        auto wide = detail::pair_sum_eval<boost::multiprecision::cpp_complex_50>(lp, x, nu,
                                                                                 plan.terms);
        round_err = wide.peak_abs * 1e-48 * fudge;
        return {wide.value, plan.tail_bound + round_err};
    }
    if (digits <= 96) {
        auto wide = detail::pair_sum_eval<boost::multiprecision::cpp_complex_100>(lp, x, nu,
                                                                                  plan.terms);
        round_err = wide.peak_abs * 1e-98 * fudge;
        return {wide.value, plan.tail_bound + round_err};
    }
    throw tolerance_error("pair sum needs " + std::to_string(digits) +
                              " digits, beyond the available tiers; use the quadrature route",
                          complex{std::numeric_limits<double>::quiet_NaN(), 0.0},
                          std::numeric_limits<double>::infinity());
}

// G(main) = G_{p,x}(0) - G_{p,x}(diamond), each half to tol/2.
inline certified_complex main_factor(const LocalParams& lp, double x, double tol) {
    if (x == 0.0) return {complex{1.0, 0.0}, 0.0};
    const certified_complex s0 = g_pair_sum(0, lp, x, 0.5 * tol);
    const certified_complex sd = g_pair_sum(lp.diamond(), lp, x, 0.5 * tol);
    return {s0.value - sd.value, s0.err + sd.err};
}

// sum_c G_c(p,x) delta_even^c in closed form: 1 for r odd, the unimodular
// exp(-i x log(1 - p^(-sigma))) for r even.
inline complex unit_factor(const LocalParams& lp, double x) {
    if (lp.delta_even() == 0) return complex{1.0, 0.0};
    return std::polar(1.0, -x * lp.log_one_minus_a());
}

// Series evaluation of the local transform: unit_factor * main_factor.
inline certified_complex local_transform_series(const LocalParams& lp, double x, double tol) {
    if (x == 0.0) return {complex{1.0, 0.0}, 0.0};
    const certified_complex m = main_factor(lp, x, tol);
    return {unit_factor(lp, x) * m.value, m.err};
}

// Computable form of the local transform's deviation from 1:
//   |M(x) - 1| <= |x| |mean| + x^2/2 * sup|log factor|^2.
inline double one_minus_bound(const LocalParams& lp, double x) {
    const double s = log_factor_sup(lp);
    return std::abs(x) * std::abs(st_mean_log_factor(lp)) + 0.5 * x * x * s * s;
}

// Cheap upper bound (majorant level, so pessimistic) on the decimal digits
// the series route could need.  Product evaluators use it to route a factor
// to the quadrature path without running the series first.
inline int series_digits_upper(const LocalParams& lp, double x, double tol) {
    if (x == 0.0) return 0;
    const double X = std::abs(x);
    const double peak10 = 2.0 * X * (1.0 + lp.a) / (1.0 - lp.a) / std::log(10.0);
    const double tol10 = std::max(0.0, -std::log10(std::max(tol, 1e-300)));
    return static_cast<int>(std::ceil(peak10 + tol10)) + 8;
}

}  // namespace mfunc
