#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mfunc/common.hpp"
#include "mfunc/gseries.hpp"
#include "mfunc/local.hpp"
#include "mfunc/primes.hpp"
#include "mfunc/quadrature.hpp"
#include "mfunc/sato_tate.hpp"

namespace mfunc {

// Sampled transform values on an x grid.  `primes` set marks a finite
// product; otherwise the table is the limit over all primes != excluded_q.
struct TransformTable {
    double sigma = 0.0;
    int r = 1;
    std::optional<PrimeSet> primes;
    std::optional<std::uint64_t> excluded_q;
    std::vector<double> x;
    std::vector<complex> values;
    std::vector<double> err;
    bool is_limit() const { return !primes.has_value(); }
};

// Sampled density values on a u grid.  mass is the trapezoid mass of the
// grid divided by sqrt(2 pi).
struct DensityGrid {
    double sigma = 0.0;
    int r = 1;
    std::vector<double> u;
    std::vector<double> values;
    std::vector<double> err;
    double mass = 0.0;
};

// One local transform factor.  The series route is preferred; factors whose
// series would need more precision than the widest tier go through the
// direct oscillatory quadrature instead (the two agree within tolerance, see
// the dual-route tests).
inline certified_complex transform_factor(const LocalParams& lp, double x, double tol) {
    if (x == 0.0) return {complex{1.0, 0.0}, 0.0};
    if (series_digits_upper(lp, x, tol) <= 96) {
        try {
            return local_transform_series(lp, x, tol);
        } catch (const tolerance_error&) {
            // fall through to quadrature
        }
    }
    return local_transform_quadrature(x, lp, tol);
}

inline certified_complex finite_transform(const PrimeSet& ps, double sigma, int r, double x,
                                          double tol) {
    if (!(tol > 0.0)) throw validation_error("tolerance must be positive");
    if (ps.members.empty()) throw validation_error("prime set must be nonempty");
    const double tol_each = tol / static_cast<double>(ps.members.size());
    complex prod{1.0, 0.0};
    double err = 0.0;
    for (std::uint64_t p : ps.members) {
        LocalParams lp(p, sigma, r);
        certified_complex f = transform_factor(lp, x, tol_each);
        prod *= f.value;
        err += f.err;  // factor moduli stay <= 1, no amplification
    }
    return {prod, err};
}

namespace detail {

// Per-prime deviation coefficients for the product tail: for every p > y,
//   |factor(p, x) - 1| <= |x| c_mean p^(-2 sigma) + x^2/2 (c_g p^(-sigma))^2.
inline double tail_deviation_coefficient(double sigma, int r, double x) {
    const double one_minus = 1.0 - std::pow(2.0, -sigma);
    const double c_mean = (r == 1) ? 0.5 : 0.5 / one_minus;
    const double c_g = (2.0 + (r == 2 ? 1.0 : 0.0)) / one_minus;
    return std::abs(x) * c_mean + 0.5 * x * x * c_g * c_g;
}

}  // namespace detail

// Product over all primes != q, truncated at a level y where the certified
// tail is small.  The tail primes multiply the partial product by a factor
// within exp(S) - 1 of 1, where S is the summed deviation bound, so the cut
// is weighted by the partial product's modulus; for large |x| the partial
// product collapses quickly and very few factors are needed.
inline certified_complex limit_transform(std::optional<std::uint64_t> q, double sigma, int r,
                                         double x, double tol,
                                         std::uint64_t y_cap = 10000000) {
    if (!(tol > 0.0)) throw validation_error("tolerance must be positive");
    if (q && !is_prime(*q)) throw validation_error("excluded level value is not prime");
    if (x == 0.0) return {complex{1.0, 0.0}, 0.0};
    const double coeff = detail::tail_deviation_coefficient(sigma, r, x);

    complex partial{1.0, 0.0};
    double err_sum = 0.0;
    std::uint64_t lo = 2, hi = 64;
    long index = 0;
    while (true) {
        for_each_prime(lo, hi, [&](std::uint64_t p) {
            if (q && p == *q) return;
            LocalParams lp(p, sigma, r);
            const double tol_f =
                std::max(tol / (16.0 * (static_cast<double>(index) + 4.0) *
                                (static_cast<double>(index) + 4.0)),
                         1e-14);
            certified_complex f = transform_factor(lp, x, tol_f);
            partial *= f.value;
            err_sum += f.err;
            ++index;
        });
        const double s_tail = coeff * prime_tail_bound(static_cast<double>(hi), 2.0 * sigma);
        const double tail_err = std::abs(partial) * std::min(2.0, std::expm1(s_tail));
        if (err_sum + tail_err <= tol) return {partial, err_sum + tail_err};
        if (hi >= y_cap) {
            throw tolerance_error("prime budget exhausted before the product tail certified",
                                  partial, err_sum + tail_err);
        }
        lo = hi + 1;
        hi = std::min<std::uint64_t>(y_cap, hi * 2);
    }
}

inline TransformTable transform_table(std::optional<std::uint64_t> q,
                                      const std::optional<PrimeSet>& ps, double sigma, int r,
                                      const std::vector<double>& x_grid, double tol) {
    TransformTable t;
    t.sigma = sigma;
    t.r = r;
    t.primes = ps;
    t.excluded_q = q;
    t.x = x_grid;
    t.values.resize(x_grid.size());
    t.err.resize(x_grid.size());
    parallel_for(x_grid.size(), [&](std::size_t i) {
        certified_complex v = ps ? finite_transform(*ps, sigma, r, x_grid[i], tol)
                                 : limit_transform(q, sigma, r, x_grid[i], tol);
        t.values[i] = v.value;
        t.err[i] = v.err;
    });
    return t;
}

namespace detail {

struct PowerEnvelope {
    double amplitude = 0.0;
    double exponent = 0.0;  // |T| ~ amplitude * x^(-exponent)
};

// Least-squares power law through log-spaced block maxima of |T| on
// [x_lo, x_hi].  Block maxima sidestep the zeros of the oscillating values.
inline PowerEnvelope fit_power_envelope(const std::vector<double>& xs,
                                        const std::vector<double>& mags, double x_lo,
                                        double x_hi, int blocks = 12) {
    std::vector<double> bx(blocks, 0.0), bm(blocks, 0.0);
    const double la = std::log(x_lo), lb = std::log(x_hi);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < x_lo || xs[i] > x_hi) continue;
        int k = static_cast<int>((std::log(xs[i]) - la) / (lb - la) * blocks);
        k = std::min(blocks - 1, std::max(0, k));
        if (mags[i] > bm[k]) {
            bm[k] = mags[i];
            bx[k] = xs[i];
        }
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = 0; k < blocks; ++k) {
        if (bm[k] <= 0.0) continue;
        const double X = std::log(bx[k]);
        const double Y = std::log(std::max(bm[k], 1e-300));
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
        ++n;
    }
    PowerEnvelope env;
    if (n < 2) {
        env.amplitude = 0.0;
        env.exponent = std::numeric_limits<double>::infinity();
        return env;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double inter = (sy - slope * sx) / n;
    env.exponent = -slope;
    env.amplitude = std::exp(inter);
    return env;
}

}  // namespace detail

struct InversionQuad {
    double x_max = 200.0;
    double x_step = 0.05;
};

// Fourier inversion of a transform evaluator on a symmetric x grid.  tol is
// the per-sample transform tolerance; the reported per-point error adds the
// summed sample bounds, a step-halving estimate of the discretization error,
// and the integrated tail of a fitted power-law envelope beyond x_max.
inline DensityGrid invert_density_of(
    const std::function<certified_complex(double, double)>& transform, double sigma, int r,
    const std::vector<double>& u_grid, InversionQuad quad, double tol) {
    if (!(quad.x_max > 0.0) || !(quad.x_step > 0.0)) {
        throw validation_error("inversion grid extent and step must be positive");
    }
    if (u_grid.size() < 2 || !std::is_sorted(u_grid.begin(), u_grid.end())) {
        throw validation_error("u grid must be ascending with at least two points");
    }
    const std::size_t K = static_cast<std::size_t>(std::floor(quad.x_max / quad.x_step));
    std::vector<double> xs(K + 1);
    std::vector<complex> T(K + 1);
    std::vector<double> Terr(K + 1);
    for (std::size_t j = 0; j <= K; ++j) xs[j] = static_cast<double>(j) * quad.x_step;
    parallel_for(K + 1, [&](std::size_t j) {
        certified_complex v = transform(xs[j], tol);
        T[j] = v.value;
        Terr[j] = v.err;
    });

    if (std::abs(T[K]) > 0.1) {
        throw tolerance_error(
            "transform has not decayed at x_max; raise x_max to invert",
            complex{T[K]}, std::abs(T[K]));
    }
    std::vector<double> mags(K + 1);
    for (std::size_t j = 0; j <= K; ++j) mags[j] = std::abs(T[j]);
    double tail_est = 0.0;
    const double peak_last_decade =
        *std::max_element(mags.begin() + static_cast<long>(9 * K / 10), mags.end());
    if (peak_last_decade > 1e-280) {
        auto env = detail::fit_power_envelope(xs, mags, quad.x_max / 10.0, quad.x_max);
        if (!(env.exponent > 1.0)) {
            throw tolerance_error("transform envelope is not integrable past x_max (exponent " +
                                      std::to_string(env.exponent) + "); raise x_max",
                                  complex{0.0, 0.0}, std::numeric_limits<double>::infinity());
        }
        tail_est = 2.0 * env.amplitude * std::pow(quad.x_max, 1.0 - env.exponent) /
                   ((env.exponent - 1.0) * sqrt_two_pi);
    }
    double err_weights = 0.0;
    for (std::size_t j = 0; j <= K; ++j) err_weights += (j == 0 || j == K) ? Terr[j] : 2.0 * Terr[j];
    const double sample_err = quad.x_step * err_weights / sqrt_two_pi;

    DensityGrid grid;
    grid.sigma = sigma;
    grid.r = r;
    grid.u = u_grid;
    grid.values.resize(u_grid.size());
    grid.err.resize(u_grid.size());
    parallel_for(u_grid.size(), [&](std::size_t i) {
        const double u = u_grid[i];
        double full = 0.0, half = 0.0;
        for (std::size_t j = 0; j <= K; ++j) {
            const double re = T[j].real() * std::cos(xs[j] * u) + T[j].imag() * std::sin(xs[j] * u);
            const double w = (j == 0 || j == K) ? 1.0 : 2.0;
            full += w * re;
            if (j % 2 == 0) half += (j == 0 || j == K) ? re : 2.0 * re;
        }
        const double value = quad.x_step * full / sqrt_two_pi;
        double disc = 0.0;
        if (K % 2 == 0 && K >= 4) {
            disc = std::abs(value - 2.0 * quad.x_step * half / sqrt_two_pi) / 3.0;
        }
        grid.values[i] = value;
        grid.err[i] = sample_err + disc + tail_est + 1e-15 * static_cast<double>(K);
    });
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < u_grid.size(); ++i) {
        mass += 0.5 * (grid.values[i] + grid.values[i + 1]) * (u_grid[i + 1] - u_grid[i]);
    }
    grid.mass = mass / sqrt_two_pi;
    return grid;
}

inline DensityGrid invert_density(std::optional<std::uint64_t> q, double sigma, int r,
                                  const std::vector<double>& u_grid, InversionQuad quad,
                                  double tol) {
    return invert_density_of(
        [&](double x, double t) { return limit_transform(q, sigma, r, x, t); }, sigma, r,
        u_grid, quad, tol);
}

inline DensityGrid invert_density(const PrimeSet& ps, double sigma, int r,
                                  const std::vector<double>& u_grid, InversionQuad quad,
                                  double tol) {
    return invert_density_of(
        [&](double x, double t) { return finite_transform(ps, sigma, r, x, t); }, sigma, r,
        u_grid, quad, tol);
}

// Iterated convolution of the local value densities over a finite prime set,
// computed on a refined uniform grid.  Every convolution with a new prime is
// pulled back to the angle side, where the measure (2/pi) sin^2(theta/r) is
// bounded; the first factor is evaluated in closed form so its integrable
// endpoint singularity (r = 2) is absorbed by the edge-regularized panels.
inline DensityGrid finite_density_convolution(const PrimeSet& ps, double sigma, int r,
                                              const std::vector<double>& u_grid) {
    if (ps.members.empty()) throw validation_error("prime set must be nonempty");
    if (u_grid.size() < 2 || !std::is_sorted(u_grid.begin(), u_grid.end())) {
        throw validation_error("u grid must be ascending with at least two points");
    }
    const double h_out = u_grid[1] - u_grid[0];
    for (std::size_t i = 1; i + 1 < u_grid.size(); ++i) {
        if (std::abs((u_grid[i + 1] - u_grid[i]) - h_out) > 1e-9 * std::max(1.0, h_out)) {
            throw validation_error("u grid must be uniform");
        }
    }
    double lo_tot = 0.0, hi_tot = 0.0;
    double narrowest = std::numeric_limits<double>::infinity();
    std::vector<LocalParams> locals;
    for (std::uint64_t p : ps.members) {
        locals.emplace_back(p, sigma, r);
        auto iv = value_interval(locals.back());
        lo_tot += iv.lo;
        hi_tot += iv.hi;
        narrowest = std::min(narrowest, iv.length());
    }
    if (narrowest < 4.0 * h_out) {
        throw validation_error("grid step too coarse to resolve the narrowest local interval (" +
                               std::to_string(narrowest) + " wide)");
    }

    // refined internal axis aligned with the output nodes
    const int oversample = 8;
    const double h = h_out / oversample;
    const long n_lo = static_cast<long>(std::ceil((u_grid.front() - (lo_tot - 2.0 * h)) / h)) + 1;
    const double start = u_grid.front() - static_cast<double>(std::max<long>(n_lo, 0)) * h;
    const double stop = std::max(u_grid.back(), hi_tot + 2.0 * h);
    const std::size_t n = static_cast<std::size_t>(std::ceil((stop - start) / h)) + 2;
    std::vector<double> axis(n);
    for (std::size_t i = 0; i < n; ++i) axis[i] = start + static_cast<double>(i) * h;

    std::vector<double> vals(n, 0.0);
    double fold_err = 0.0;

    auto fold = [&](const std::function<double(double)>& prev, double prev_lo, double prev_hi,
                    const LocalParams& lp, std::vector<double>& out) {
        auto iv = value_interval(lp);
        std::vector<double> point_err(n, 0.0);
        parallel_for(n, [&](std::size_t i) {
            const double t = axis[i];
            // window of theta where t - value(theta) lies in the support of prev
            double va = t - prev_hi;  // smallest needed value of the local map
            double vb = t - prev_lo;  // largest
            if (vb <= iv.lo || va >= iv.hi) {
                out[i] = 0.0;
                return;
            }
            va = std::max(va, iv.lo);
            vb = std::min(vb, iv.hi);
            const double theta_lo = theta_of_u(vb, lp);
            const double theta_hi = (va <= iv.lo) ? pi : theta_of_u(va, lp);
            auto f = [&](double theta) {
                const double s = std::sin(theta / lp.r);
                return complex{prev(t - local_log_factor(theta, lp)) * (2.0 / pi) * s * s, 0.0};
            };
            auto res = integrate_edge_regularized(f, theta_lo, theta_hi, 1e-9, 4);
            out[i] = res.value.real();
            point_err[i] = res.err;
        });
        fold_err += *std::max_element(point_err.begin(), point_err.end());
    };

    // first factor sampled in closed form
    {
        const LocalParams& lp = locals.front();
        for (std::size_t i = 0; i < n; ++i) vals[i] = local_density(axis[i], lp);
    }
    double cur_lo = value_interval(locals.front()).lo;
    double cur_hi = value_interval(locals.front()).hi;

    for (std::size_t k = 1; k < locals.size(); ++k) {
        std::vector<double> next(n, 0.0);
        if (k == 1) {
            const LocalParams& first = locals.front();
            auto closed = [&](double v) { return local_density(v, first); };
            fold(closed, cur_lo, cur_hi, locals[k], next);
        } else {
            auto interp = [&](double v) -> double {
                if (v <= axis.front() || v >= axis.back()) return 0.0;
                const double pos = (v - axis.front()) / h;
                const std::size_t j = static_cast<std::size_t>(pos);
                const double frac = pos - static_cast<double>(j);
                return vals[j] * (1.0 - frac) + vals[j + 1] * frac;
            };
            fold(interp, cur_lo, cur_hi, locals[k], next);
        }
        vals.swap(next);
        auto iv = value_interval(locals[k]);
        cur_lo += iv.lo;
        cur_hi += iv.hi;
    }

    DensityGrid grid;
    grid.sigma = sigma;
    grid.r = r;
    grid.u = u_grid;
    grid.values.resize(u_grid.size());
    grid.err.resize(u_grid.size());
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        const double pos = (u_grid[i] - axis.front()) / h;
        const long j = std::lround(pos);
        if (j < 0 || static_cast<std::size_t>(j) >= n) {
            grid.values[i] = 0.0;
            grid.err[i] = fold_err;
            continue;
        }
        grid.values[i] = vals[static_cast<std::size_t>(j)];
        // local curvature as an interpolation-scale error hint
        double curv = 0.0;
        if (j > 0 && static_cast<std::size_t>(j + 1) < n) {
            curv = std::abs(vals[j + 1] - 2.0 * vals[j] + vals[j - 1]) / 8.0;
        }
        grid.err[i] = fold_err + curv;
    }
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < u_grid.size(); ++i) {
        mass += 0.5 * (grid.values[i] + grid.values[i + 1]) * (u_grid[i + 1] - u_grid[i]);
    }
    grid.mass = mass / sqrt_two_pi;
    return grid;
}

// Trapezoid forward transform of a sampled density: the dual check
//   int M(u) e^{i x u} du / sqrt(2 pi).
inline complex forward_transform(const DensityGrid& grid, double x) {
    complex acc{0.0, 0.0};
    for (std::size_t i = 0; i + 1 < grid.u.size(); ++i) {
        const double du = grid.u[i + 1] - grid.u[i];
        const complex f0 = grid.values[i] * std::polar(1.0, x * grid.u[i]);
        const complex f1 = grid.values[i + 1] * std::polar(1.0, x * grid.u[i + 1]);
        acc += 0.5 * du * (f0 + f1);
    }
    return acc / sqrt_two_pi;
}

// Monte Carlo cross-check: draws one angle per prime per sample, sums the
// local log factors at the r-fold angle, and compares the empirical
// characteristic function and mean against the deterministic evaluations.
struct McReport {
    std::vector<double> x_panel;
    std::vector<complex> ecf;
    std::vector<double> se_re, se_im;
    std::vector<complex> reference;
    std::vector<double> reference_err;
    double mean_u = 0.0;
    double mean_se = 0.0;
    double predicted_mean = 0.0;
    double chi_square = -1.0;
    long chi_dof = -1;
    std::size_t n_samples = 0;
};

inline McReport mc_compare(const PrimeSet& ps, double sigma, int r,
                           const std::vector<double>& x_panel, std::size_t n_samples,
                           std::uint64_t seed, const DensityGrid* histogram = nullptr) {
    if (n_samples < 1000) throw validation_error("need at least 1000 samples");
    if (ps.members.empty()) throw validation_error("prime set must be nonempty");
    std::vector<LocalParams> locals;
    for (std::uint64_t p : ps.members) locals.emplace_back(p, sigma, r);

    const std::size_t nx = x_panel.size();
    std::vector<double> sum_c(nx, 0.0), sum_s(nx, 0.0), sum_cc(nx, 0.0), sum_ss(nx, 0.0);
    double sum_u = 0.0, sum_uu = 0.0;
    std::vector<long> bins;
    double bin_lo = 0.0, bin_w = 1.0;
    int nbins = 0;
    if (histogram && histogram->u.size() >= 3) {
        nbins = static_cast<int>(std::min<std::size_t>(40, histogram->u.size() / 4));
        bins.assign(nbins, 0);
        bin_lo = histogram->u.front();
        bin_w = (histogram->u.back() - histogram->u.front()) / nbins;
    }

    STSampler sampler(seed);
    for (std::size_t i = 0; i < n_samples; ++i) {
        double u = 0.0;
        for (const auto& lp : locals) {
            u += local_log_factor(lp.r * sampler.next_angle(), lp);
        }
        sum_u += u;
        sum_uu += u * u;
        for (std::size_t k = 0; k < nx; ++k) {
            const double c = std::cos(x_panel[k] * u), s = std::sin(x_panel[k] * u);
            sum_c[k] += c;
            sum_s[k] += s;
            sum_cc[k] += c * c;
            sum_ss[k] += s * s;
        }
        if (nbins > 0) {
            int b = static_cast<int>((u - bin_lo) / bin_w);
            if (b >= 0 && b < nbins) ++bins[b];
        }
    }

    McReport rep;
    rep.x_panel = x_panel;
    rep.n_samples = n_samples;
    const double N = static_cast<double>(n_samples);
    rep.ecf.resize(nx);
    rep.se_re.resize(nx);
    rep.se_im.resize(nx);
    rep.reference.resize(nx);
    rep.reference_err.resize(nx);
    for (std::size_t k = 0; k < nx; ++k) {
        const double mc = sum_c[k] / N, ms = sum_s[k] / N;
        rep.ecf[k] = {mc, ms};
        rep.se_re[k] = std::sqrt(std::max(0.0, sum_cc[k] / N - mc * mc) / N);
        rep.se_im[k] = std::sqrt(std::max(0.0, sum_ss[k] / N - ms * ms) / N);
        certified_complex ref = finite_transform(ps, sigma, r, x_panel[k], 1e-10);
        rep.reference[k] = ref.value;
        rep.reference_err[k] = ref.err;
    }
    rep.mean_u = sum_u / N;
    rep.mean_se = std::sqrt(std::max(0.0, sum_uu / N - rep.mean_u * rep.mean_u) / N);
    rep.predicted_mean = 0.0;
    for (const auto& lp : locals) rep.predicted_mean += st_mean_log_factor(lp);

    if (nbins > 0) {
        double chi = 0.0;
        long dof = 0;
        for (int b = 0; b < nbins; ++b) {
            // expected bin probability from the grid by trapezoid
            const double a = bin_lo + b * bin_w, c = a + bin_w;
            double pexp = 0.0;
            const auto& g = *histogram;
            for (std::size_t i = 0; i + 1 < g.u.size(); ++i) {
                const double lo = std::max(a, g.u[i]), hi = std::min(c, g.u[i + 1]);
                if (hi <= lo) continue;
                const double t0 = (lo - g.u[i]) / (g.u[i + 1] - g.u[i]);
                const double t1 = (hi - g.u[i]) / (g.u[i + 1] - g.u[i]);
                const double v0 = g.values[i] + (g.values[i + 1] - g.values[i]) * t0;
                const double v1 = g.values[i] + (g.values[i + 1] - g.values[i]) * t1;
                pexp += 0.5 * (v0 + v1) * (hi - lo);
            }
            pexp /= sqrt_two_pi;
            const double expected = N * pexp;
            if (expected >= 5.0) {
                const double d = static_cast<double>(bins[b]) - expected;
                chi += d * d / expected;
                ++dof;
            }
        }
        rep.chi_square = chi;
        rep.chi_dof = std::max<long>(dof - 1, 1);
    }
    return rep;
}

}  // namespace mfunc
