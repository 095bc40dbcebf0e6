// Acceptance suite: every criterion prints one [PASS]/[FAIL] line with the
// measured quantities; the exit status is the number of failures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mfunc/global.hpp"
#include "mfunc/newforms.hpp"

using namespace mfunc;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// criterion 1: closed-form means under the angle measure
Outcome criterion1() {
    auto q = st_quadrature(96);
    double worst = 0.0;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 17ull}) {
        for (double sigma : {0.6, 1.0, 2.0}) {
            for (int r : {1, 2}) {
                LocalParams lp(p, sigma, r);
                const double got =
                    st_integrate(q, [&](double t) { return local_log_factor(lp.r * t, lp); });
                worst = std::max(worst, std::abs(got - st_mean_log_factor(lp)));
            }
        }
    }
    std::ostringstream os;
    os << "max deviation " << worst;
    return {worst <= 1e-10, os.str()};
}

// criterion 2: series route vs quadrature route
Outcome criterion2() {
    double worst = 0.0;
    for (std::uint64_t p : {2ull, 5ull, 101ull}) {
        for (double sigma : {0.6, 1.0, 2.0}) {
            for (int r : {1, 2}) {
                LocalParams lp(p, sigma, r);
                for (double x : {0.0, 0.5, -0.5, 2.0, -2.0, 10.0, -10.0, 50.0}) {
                    auto series = local_transform_series(lp, x, 1e-10);
                    auto quad = local_transform_quadrature(x, lp, 1e-10);
                    worst = std::max(worst, std::abs(series.value - quad.value));
                }
            }
        }
    }
    std::ostringstream os;
    os << "max route difference " << worst;
    return {worst <= 1e-8, os.str()};
}

// criterion 3: transform modulus bound
Outcome criterion3() {
    double worst = 0.0;
    for (std::uint64_t p : {2ull, 5ull, 101ull}) {
        for (double sigma : {0.6, 1.0, 2.0}) {
            for (int r : {1, 2}) {
                LocalParams lp(p, sigma, r);
                for (double x : {0.0, 0.5, -0.5, 2.0, -2.0, 10.0, -10.0, 50.0, 100.0, 1000.0,
                                 10000.0}) {
                    auto v = local_transform_quadrature(x, lp, 1e-10);
                    worst = std::max(worst, std::abs(v.value));
                }
            }
        }
    }
    std::ostringstream os;
    os << "max modulus " << worst;
    return {worst <= 1.0 + 1e-9, os.str()};
}

const DensityGrid& criterion4_density() {
    static const DensityGrid grid = [] {
        std::vector<double> us(601);
        for (std::size_t i = 0; i < us.size(); ++i) us[i] = -2.0 + 6.0 * i / 600.0;
        return invert_density(std::uint64_t{7}, 1.2, 2, us, {120.0, 0.05}, 1e-8);
    }();
    return grid;
}

// criterion 4: density normalization and non-negativity
Outcome criterion4() {
    const auto& g = criterion4_density();
    double min_val = 0.0;
    for (double v : g.values) min_val = std::min(min_val, v);
    std::ostringstream os;
    os << "mass " << g.mass << ", min " << min_val;
    return {std::abs(g.mass - 1.0) <= 1e-4 && min_val >= -1e-6, os.str()};
}

// criterion 5: forward transform of the inverted density
Outcome criterion5() {
    const auto& g = criterion4_density();
    double worst = 0.0;
    for (double x : {0.0, 1.0, 5.0}) {
        auto fwd = forward_transform(g, x);
        auto ref = limit_transform(std::uint64_t{7}, 1.2, 2, x, 1e-10);
        worst = std::max(worst, std::abs(fwd - ref.value));
    }
    std::ostringstream os;
    os << "max duality gap " << worst;
    return {worst <= 1e-3, os.str()};
}

// criterion 6: convolution route vs inversion route at finite level
Outcome criterion6() {
    auto ps = prime_set_from({2, 3, 5});
    const double sigma = 1.2;
    const int r = 1;
    double lo = 0.0, hi = 0.0;
    for (auto p : ps.members) {
        auto iv = value_interval(LocalParams(p, sigma, r));
        lo += iv.lo;
        hi += iv.hi;
    }
    std::vector<double> grid(600);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = (lo - 0.2) + (hi - lo + 0.4) * i / 599.0;
    }
    auto conv = finite_density_convolution(ps, sigma, r, grid);
    auto inv = invert_density(ps, sigma, r, grid, {1300.0, 0.25}, 1e-9);
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        sup = std::max(sup, std::abs(conv.values[i] - inv.values[i]));
    }
    std::ostringstream os;
    os << "sup-norm gap " << sup;
    return {sup <= 1e-4, os.str()};
}

// criterion 7: coefficient recurrence vs composition sums, majorant bound
Outcome criterion7() {
    double worst_rel = 0.0;
    bool majorant_ok = true;
    for (std::uint64_t p : {2ull, 5ull}) {
        for (double sigma : {0.6, 1.0, 2.0}) {
            LocalParams lp(p, sigma, 1);
            for (double x : {0.5, 2.0, -3.0}) {
                auto table = g_coeff_table(lp, x, 30);
                // composition-sum oracle for a <= 8
                std::function<void(int, int, int, double, complex&)> walk =
                    [&](int a, int remaining, int parts, double prod, complex& total) {
                        if (remaining == 0) {
                            complex ixn{1.0, 0.0};
                            for (int n = 0; n < parts; ++n) ixn *= complex{0.0, x};
                            double fact = 1.0;
                            for (int n = 2; n <= parts; ++n) fact *= n;
                            total += ixn / fact / prod;
                            return;
                        }
                        for (int j = 1; j <= remaining; ++j) {
                            walk(a, remaining - j, parts + 1, prod * j, total);
                        }
                    };
                for (int a = 0; a <= 8; ++a) {
                    complex oracle{a == 0 ? 1.0 : 0.0, 0.0};
                    if (a > 0) {
                        complex total{0.0, 0.0};
                        walk(a, a, 0, 1.0, total);
                        oracle = total * std::pow(lp.a, a);
                    }
                    const double rel =
                        std::abs(table.coeffs[a] - oracle) / std::max(std::abs(oracle), 1e-30);
                    worst_rel = std::max(worst_rel, rel);
                }
                for (int a = 0; a <= table.a_max; ++a) {
                    majorant_ok =
                        majorant_ok &&
                        std::abs(table.coeffs[a]) <=
                            std::pow(lp.a, a) * g_majorant(a, std::abs(x)) * (1.0 + 1e-13) +
                                1e-300;
                }
            }
        }
    }
    std::ostringstream os;
    os << "max relative coefficient error " << worst_rel << ", majorant "
       << (majorant_ok ? "holds" : "violated");
    return {worst_rel <= 1e-12 && majorant_ok, os.str()};
}

// criterion 8: Monte Carlo characteristic function and mean
Outcome criterion8() {
    auto ps = prime_set_from({2, 3, 5, 7});
    auto rep = mc_compare(ps, 1.0, 2, {0.5, 1.0, 2.0}, 1000000, 20250809);
    bool ok = true;
    double worst_sigma = 0.0;
    for (std::size_t k = 0; k < rep.x_panel.size(); ++k) {
        const double dre = std::abs(rep.ecf[k].real() - rep.reference[k].real());
        const double dim = std::abs(rep.ecf[k].imag() - rep.reference[k].imag());
        ok = ok && dre <= 4.0 * rep.se_re[k] && dim <= 4.0 * rep.se_im[k];
        worst_sigma = std::max({worst_sigma, dre / rep.se_re[k], dim / rep.se_im[k]});
    }
    const double mean_gap = std::abs(rep.mean_u - rep.predicted_mean);
    ok = ok && mean_gap <= 4.0 * rep.mean_se;
    worst_sigma = std::max(worst_sigma, mean_gap / rep.mean_se);
    std::ostringstream os;
    os << "worst deviation " << worst_sigma << " standard errors";
    return {ok, os.str()};
}

// criterion 9: product monotonicity under prime-set growth
Outcome criterion9() {
    std::mt19937_64 rng(424243);
    std::vector<std::uint64_t> pool = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    double worst = -1.0;
    bool ok = true;
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::size_t small_n = 1 + rng() % 5;
        const std::size_t big_n = small_n + 1 + rng() % (pool.size() - small_n);
        auto small = prime_set_from({pool.begin(), pool.begin() + small_n});
        auto big = prime_set_from({pool.begin(), pool.begin() + big_n});
        const double sigma = 0.6 + 0.35 * (trial % 4);
        const int r = 1 + trial % 2;
        for (double x : {0.4, 1.3, 3.7, 8.1, 20.0}) {
            auto with_more = finite_transform(big, sigma, r, x, 1e-13);
            auto with_less = finite_transform(small, sigma, r, x, 1e-13);
            const double slack = std::abs(with_more.value) - std::abs(with_less.value);
            worst = std::max(worst, slack);
            ok = ok && slack <= 1e-12;
        }
    }
    std::ostringstream os;
    os << "max modulus growth " << worst;
    return {ok, os.str()};
}

// criterion 10: realized decay exponent with three primes retained
Outcome criterion10() {
    auto ps = prime_set_from({2, 3, 5});
    const double sigma = 1.0;
    const int r = 1;
    std::vector<double> xs, mags;
    for (int i = 0; i <= 80; ++i) {
        const double x = 100.0 * std::pow(100.0, i / 80.0);
        auto v = finite_transform(ps, sigma, r, x, 1e-11);
        xs.push_back(x);
        mags.push_back(std::abs(v.value));
    }
    auto env = detail::fit_power_envelope(xs, mags, 100.0, 10000.0, 10);
    std::ostringstream os;
    os << "fitted envelope exponent " << env.exponent;
    return {env.exponent >= 1.4, os.str()};
}

// criterion 11: synthetic-ensemble empirical pipeline
Outcome criterion11() {
    auto ps = prime_set(std::uint64_t{7}, 13.0);  // {2,3,5,11,13}
    auto batch = synthetic_batch(7, 1, 4, 5000, ps.members, 6060842);
    auto mass = petersson_check(batch, 1);
    bool ok = mass.sum == 1.0;
    double worst_sigma = 0.0;
    const double sigma = 1.0;
    const int r = 2;
    for (double x : {0.5, 1.0, 2.0}) {
        auto avg = empirical_average(batch, x, ps, sigma, r);
        auto ref = finite_transform(ps, sigma, r, x, 1e-11);
        // componentwise sample standard errors
        double s_re = 0.0, s_im = 0.0, m_re = 0.0, m_im = 0.0;
        for (const auto& f : batch.forms) {
            const complex z = std::polar(1.0, x * partial_log_l(f, ps, sigma, r));
            m_re += z.real();
            m_im += z.imag();
            s_re += z.real() * z.real();
            s_im += z.imag() * z.imag();
        }
        const double n = static_cast<double>(batch.forms.size());
        m_re /= n;
        m_im /= n;
        const double se_re = std::sqrt(std::max(0.0, s_re / n - m_re * m_re) / n);
        const double se_im = std::sqrt(std::max(0.0, s_im / n - m_im * m_im) / n);
        const double dre = std::abs(avg.average.real() - ref.value.real());
        const double dim = std::abs(avg.average.imag() - ref.value.imag());
        ok = ok && dre <= 4.0 * se_re && dim <= 4.0 * se_im;
        worst_sigma = std::max({worst_sigma, dre / se_re, dim / se_im});
    }
    std::ostringstream os;
    os << "mass " << mass.sum << ", worst deviation " << worst_sigma << " standard errors";
    return {ok, os.str()};
}

// criterion 12: Euler-product identity on synthetic forms
Outcome criterion12() {
    auto ps = prime_set(std::uint64_t{7}, 31.0);
    auto batch = synthetic_batch(7, 1, 4, 100, ps.members, 550123);
    const double sigma = 1.2;
    double worst = 0.0;
    for (const auto& f : batch.forms) {
        double product = 1.0;
        for (auto p : ps.members) {
            const double a = std::pow(static_cast<double>(p), -sigma);
            product /= 1.0 - f.ap.at(p) * a + a * a;
        }
        const double via_log = std::exp(partial_log_l(f, ps, sigma, 1));
        worst = std::max(worst, std::abs(via_log - product) / std::abs(product));
    }
    std::ostringstream os;
    os << "max relative gap " << worst;
    return {worst <= 1e-12, os.str()};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
    {"closed-form means of the local log factor", criterion1},
    {"dual-route transform equivalence", criterion2},
    {"transform modulus bound", criterion3},
    {"inversion density normalization and positivity", criterion4},
    {"Fourier duality of the inverted density", criterion5},
    {"convolution vs inversion route equivalence", criterion6},
    {"coefficient recurrence oracle and majorant", criterion7},
    {"Monte Carlo consistency", criterion8},
    {"product monotonicity", criterion9},
    {"realized decay exponent", criterion10},
    {"synthetic empirical pipeline", criterion11},
    {"Euler-product identity", criterion12},
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] criterion %2d: %s (%s; %.1fs)\n", out.pass ? "PASS" : "FAIL", id,
                    criteria[i].first.c_str(), out.detail.c_str(), elapsed_s(t0));
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures;
}
