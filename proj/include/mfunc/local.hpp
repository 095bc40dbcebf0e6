#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>

#include "mfunc/common.hpp"
#include "mfunc/primes.hpp"
#include "mfunc/quadrature.hpp"

namespace mfunc {

// One local factor: prime p, exponent sigma > 1/2, symmetric-power class
// r in {1, 2}.  delta_even is 1 for r even, and the main-factor lag diamond
// is 2 for r = 1, 1 for r = 2.
struct LocalParams {
    LocalParams(std::uint64_t p_, double sigma_, int r_) : p(p_), sigma(sigma_), r(r_) {
        if (!is_prime(p)) throw validation_error(std::to_string(p) + " is not prime");
        if (!(sigma > 0.5)) throw validation_error("sigma must exceed 1/2");
        if (r != 1 && r != 2) throw validation_error("symmetric-power class must be 1 or 2");
        a = std::pow(static_cast<double>(p), -sigma);
    }

    std::uint64_t p;
    double sigma;
    int r;
    double a;  // p^(-sigma), always in (0, 1)

    int delta_even() const { return r == 2 ? 1 : 0; }
    int diamond() const { return r == 1 ? 2 : 1; }
    // log(1 - p^(-sigma)), the unit-root contribution present when r is even.
    double log_one_minus_a() const { return std::log1p(-a); }
};

// -Log(1 - t p^(-sigma)), principal branch.  |t p^(-sigma)| < 1 so the
// argument never reaches the cut.
inline complex local_log_term(complex t, const LocalParams& lp) {
    return -std::log(complex{1.0, 0.0} - t * lp.a);
}

// Real log of the full local factor at angle eta:
//   -log(1 - 2 p^(-sigma) cos(eta) + p^(-2sigma)) - delta_even * log(1 - p^(-sigma)).
inline double local_log_factor(double eta, const LocalParams& lp) {
    const double m = lp.a * (lp.a - 2.0 * std::cos(eta));
    return -std::log1p(m) - lp.delta_even() * lp.log_one_minus_a();
}

// Value interval of the angle-to-value map, open at the lower end.
struct ValueInterval {
    double lo;
    double hi;
    double length() const { return hi - lo; }
};

inline ValueInterval value_interval(const LocalParams& lp) {
    const double shift = -lp.delta_even() * lp.log_one_minus_a();
    return {-2.0 * std::log1p(lp.a) + shift, -2.0 * std::log1p(-lp.a) + shift};
}

// Inverse of the strictly decreasing map theta -> local_log_factor(theta):
//   cos(theta) = (1 + p^(-2sigma) - exp(-(u + delta*log(1-p^(-sigma))))) / (2 p^(-sigma)).
// Accepts u in (lo, hi]; theta = 0 corresponds to u = hi.
inline double theta_of_u(double u, const LocalParams& lp) {
    const ValueInterval iv = value_interval(lp);
    if (!(u > iv.lo)) {
        throw domain_error("value " + std::to_string(u) +
                           " at or below the open lower endpoint " + std::to_string(iv.lo));
    }
    if (!(u <= iv.hi)) {
        throw domain_error("value " + std::to_string(u) +
                           " above the closed upper endpoint " + std::to_string(iv.hi));
    }
    const double e = std::exp(-(u + lp.delta_even() * lp.log_one_minus_a()));
    double c = (1.0 + lp.a * lp.a - e) / (2.0 * lp.a);
    c = std::min(1.0, std::max(-1.0, c));
    return std::acos(c);
}

// Density of the value distribution of one local factor under the
// sin^2-weighted angle measure.  Supported on (lo, hi]; the change of
// variables gives
//   sqrt(2 pi) |1 - e^{i theta} p^(-sigma)|^2 sin^2(theta/r) / (pi p^(-sigma) sin(theta)),
// oriented so the density is non-negative (the value map is decreasing in
// theta).  For r = 2 the density grows without bound toward the open lower
// endpoint; division there follows IEEE rules and yields +infinity rather
// than wrapping.
inline double local_density(double u, const LocalParams& lp) {
    const ValueInterval iv = value_interval(lp);
    if (!(u > iv.lo && u <= iv.hi)) return 0.0;
    const double theta = theta_of_u(u, lp);
    if (theta == 0.0) return 0.0;  // limit at the closed end is 0 for r = 1, 2
    const double sq = std::exp(-(u + lp.delta_even() * lp.log_one_minus_a()));
    const double sh = std::sin(theta / lp.r);
    return sqrt_two_pi * sq * sh * sh / (pi * lp.a * std::sin(theta));
}

// Largest modulus of the phase derivative of the transform integrand:
// |F'(theta)| <= 2 p^(-sigma) / (1 - p^(-sigma))^2.
inline double transform_phase_rate(const LocalParams& lp) {
    return 2.0 * lp.a / ((1.0 - lp.a) * (1.0 - lp.a));
}

// (2/pi) Int_0^pi exp(i x F(theta)) sin^2(theta/r) dtheta with F the real
// local log factor.  Adaptive panels sized to the phase variation, refined by
// doubling until two composite rules agree within tol/2.
inline certified_complex local_transform_quadrature(double x, const LocalParams& lp, double tol) {
    if (!(tol > 0.0)) throw validation_error("tolerance must be positive");
    auto integrand = [&](double theta) {
        const double f = local_log_factor(theta, lp);
        const double s = std::sin(theta / lp.r);
        return std::polar(1.0, x * f) * (2.0 / pi * s * s);
    };
    const double phase_span = std::abs(x) * transform_phase_rate(lp) * pi;
    const std::size_t initial =
        std::max<std::size_t>(8, static_cast<std::size_t>(phase_span / 4.0) + 1);
    return integrate_adaptive(integrand, 0.0, pi, tol, initial);
}

// Exact mean of the local log factor against the sin^2-weighted measure at
// the r-fold angle:
//   r = 1:  -1/(2 p^(2 sigma))
//   r = 2:  sum_{l >= 2} 1/(l p^(l sigma)) = -log(1 - p^(-sigma)) - p^(-sigma).
inline double st_mean_log_factor(const LocalParams& lp) {
    if (lp.r == 1) return -0.5 * lp.a * lp.a;
    return -lp.log_one_minus_a() - lp.a;
}

// Pointwise bound on |local_log_factor|: (2 + delta_even) * |log(1 - p^(-sigma))|.
inline double log_factor_sup(const LocalParams& lp) {
    return (2.0 + lp.delta_even()) * std::abs(lp.log_one_minus_a());
}

}  // namespace mfunc
