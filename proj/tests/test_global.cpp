#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mfunc/global.hpp"

using namespace mfunc;
using Catch::Matchers::WithinAbs;

TEST_CASE("finite product basics", "[global]") {
    auto ps = prime_set_from({2, 3});
    REQUIRE(finite_transform(ps, 1.0, 2, 0.0, 1e-12).value == complex{1.0, 0.0});

    // factor-wise oracle at x = 1
    auto got = finite_transform(ps, 1.0, 2, 1.0, 1e-11);
    auto f2 = local_transform_quadrature(1.0, LocalParams(2, 1.0, 2), 1e-12);
    auto f3 = local_transform_quadrature(1.0, LocalParams(3, 1.0, 2), 1e-12);
    REQUIRE(std::abs(got.value - f2.value * f3.value) < 1e-9);

    PrimeSet empty;
    REQUIRE_THROWS_AS(finite_transform(empty, 1.0, 1, 1.0, 1e-8), validation_error);
}

TEST_CASE("adding primes cannot raise the product modulus", "[global]") {
    std::mt19937_64 rng(20240809);
    std::vector<std::uint64_t> pool = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31};
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::size_t small_n = 1 + rng() % 4;
        const std::size_t big_n = small_n + 1 + rng() % (pool.size() - small_n);
        std::vector<std::uint64_t> small(pool.begin(), pool.begin() + small_n);
        std::vector<std::uint64_t> big(pool.begin(), pool.begin() + big_n);
        auto ps_small = prime_set_from(small);
        auto ps_big = prime_set_from(big);
        const double sigma = 0.6 + 0.2 * static_cast<double>(trial % 5);
        const int r = (trial % 2) + 1;
        for (double x : {0.3, 1.0, 4.0, 9.0, 27.0}) {
            auto lo = finite_transform(ps_big, sigma, r, x, 1e-13);
            auto hi = finite_transform(ps_small, sigma, r, x, 1e-13);
            REQUIRE(std::abs(lo.value) <= std::abs(hi.value) + 1e-12);
        }
    }
}

TEST_CASE("limit product at x = 0 and against a finite section", "[global]") {
    REQUIRE(limit_transform(std::nullopt, 2.0, 1, 0.0, 1e-10).value == complex{1.0, 0.0});

    // sigma = 2, r = 1, x = 1: the finite section over primes <= 100 differs
    // from the limit by at most the summed per-prime deviation bound.
    auto lim = limit_transform(std::nullopt, 2.0, 1, 1.0, 1e-12);
    auto ps100 = prime_set(std::nullopt, 100.0);
    auto fin = finite_transform(ps100, 2.0, 1, 1.0, 1e-12);
    double tail = 0.0;
    for_each_prime(101, 100000, [&](std::uint64_t p) {
        tail += one_minus_bound(LocalParams(p, 2.0, 1), 1.0);
    });
    tail += detail::tail_deviation_coefficient(2.0, 1, 1.0) * prime_tail_bound(100000.0, 4.0);
    REQUIRE(std::abs(lim.value - fin.value) <= tail + lim.err + fin.err);
}

TEST_CASE("limit product is stable under a larger cutoff", "[global]") {
    const double tol = 1e-9;
    auto v = limit_transform(std::uint64_t{7}, 1.1, 2, 2.0, tol);
    // brute force with a much larger explicit cutoff
    auto big = prime_set(std::uint64_t{7}, 300000.0);
    auto w = finite_transform(big, 1.1, 2, 2.0, 1e-12);
    REQUIRE(std::abs(v.value - w.value) <= tol + 1e-8);
}

TEST_CASE("limit product modulus never exceeds 1", "[global]") {
    for (double x : {0.5, 2.0, 7.0, 31.0}) {
        auto v = limit_transform(std::nullopt, 0.8, 2, x, 1e-9);
        REQUIRE(std::abs(v.value) <= 1.0 + 1e-8);
        auto c = limit_transform(std::nullopt, 0.8, 2, -x, 1e-9);
        REQUIRE(std::abs(c.value - std::conj(v.value)) <= c.err + v.err + 1e-12);
    }
}

TEST_CASE("inversion of the limit transform: mass, positivity, duality", "[global]") {
    std::vector<double> grid(241);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -1.5 + 3.5 * i / 240.0;
    auto density = invert_density(std::nullopt, 1.5, 1, grid, {40.0, 0.1}, 1e-9);
    REQUIRE_THAT(density.mass, WithinAbs(1.0, 5e-4));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        REQUIRE(density.values[i] >= -density.err[i] - 1e-9);
    }
    for (double x : {0.0, 1.0, 3.0}) {
        auto fwd = forward_transform(density, x);
        auto ref = limit_transform(std::nullopt, 1.5, 1, x, 1e-10);
        REQUIRE(std::abs(fwd - ref.value) < 2e-3);
    }
}

TEST_CASE("inversion refuses a non-decayed transform", "[global]") {
    std::vector<double> grid = {-1.0, 0.0, 1.0};
    REQUIRE_THROWS_AS(invert_density(std::nullopt, 1.5, 1, grid, {0.5, 0.05}, 1e-8),
                      tolerance_error);
}

TEST_CASE("single-prime convolution equals the sampled local density", "[global]") {
    LocalParams lp(5, 1.3, 1);
    auto iv = value_interval(lp);
    std::vector<double> grid(101);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = iv.lo - 0.05 + (iv.length() + 0.1) * i / 100.0;
    }
    auto ps = prime_set_from({5});
    auto g = finite_density_convolution(ps, 1.3, 1, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        REQUIRE_THAT(g.values[i], WithinAbs(local_density(grid[i], lp), 1e-12));
    }
}

TEST_CASE("pair convolution carries unit mass", "[global]") {
    for (int r : {1, 2}) {
        auto ps = prime_set_from({2, 3});
        double lo = 0.0, hi = 0.0;
        for (auto p : ps.members) {
            auto iv = value_interval(LocalParams(p, 1.2, r));
            lo += iv.lo;
            hi += iv.hi;
        }
        std::vector<double> grid(1201);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            grid[i] = lo - 0.1 + (hi - lo + 0.2) * i / 1200.0;
        }
        auto g = finite_density_convolution(ps, 1.2, r, grid);
        // r = 2 keeps an integrable singularity inside the first factor;
        // the grid mass converges more slowly there.
        REQUIRE_THAT(g.mass, WithinAbs(1.0, r == 1 ? 2e-4 : 2e-2));
        for (double v : g.values) REQUIRE(v >= -1e-9);
    }
}

TEST_CASE("convolution grid validation", "[global]") {
    auto ps = prime_set_from({101});
    std::vector<double> coarse = {-0.1, 0.0, 0.1, 0.2};
    REQUIRE_THROWS_AS(finite_density_convolution(ps, 2.0, 1, coarse), validation_error);
    std::vector<double> uneven = {0.0, 0.1, 0.15, 0.3};
    REQUIRE_THROWS_AS(finite_density_convolution(prime_set_from({2}), 1.0, 1, uneven),
                      validation_error);
}

TEST_CASE("convolution density is Fourier-dual to the finite product", "[global]") {
    auto ps = prime_set_from({2, 3});
    const double sigma = 1.2;
    double lo = 0.0, hi = 0.0;
    for (auto p : ps.members) {
        auto iv = value_interval(LocalParams(p, sigma, 1));
        lo += iv.lo;
        hi += iv.hi;
    }
    std::vector<double> grid(1401);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = lo - 0.1 + (hi - lo + 0.2) * i / 1400.0;
    }
    auto conv = finite_density_convolution(ps, sigma, 1, grid);
    for (double x : {0.0, 1.0, 5.0}) {
        auto fwd = forward_transform(conv, x);
        auto ref = finite_transform(ps, sigma, 1, x, 1e-11);
        REQUIRE(std::abs(fwd - ref.value) < 1e-4);
    }
}

TEST_CASE("convolution route agrees with inversion on a shared grid", "[global]") {
    auto ps = prime_set_from({2, 3});
    const double sigma = 1.2;
    double lo = 0.0, hi = 0.0;
    for (auto p : ps.members) {
        auto iv = value_interval(LocalParams(p, sigma, 1));
        lo += iv.lo;
        hi += iv.hi;
    }
    std::vector<double> grid(301);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = lo - 0.2 + (hi - lo + 0.4) * i / 300.0;
    }
    auto conv = finite_density_convolution(ps, sigma, 1, grid);
    auto inv = invert_density(ps, sigma, 1, grid, {500.0, 0.2}, 1e-9);
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        sup = std::max(sup, std::abs(conv.values[i] - inv.values[i]));
    }
    // the inversion tail past x_max = 500 dominates this comparison
    REQUIRE(sup < 5e-3);
}

TEST_CASE("Monte Carlo report is coherent", "[global]") {
    auto ps = prime_set_from({2, 3});
    std::vector<double> panel = {0.0, 0.5, 1.0};
    auto rep = mc_compare(ps, 1.0, 1, panel, 20000, 90001);
    REQUIRE(rep.ecf[0] == complex{1.0, 0.0});
    for (std::size_t k = 1; k < panel.size(); ++k) {
        REQUIRE(std::abs(rep.ecf[k].real() - rep.reference[k].real()) <=
                4.0 * rep.se_re[k] + rep.reference_err[k]);
        REQUIRE(std::abs(rep.ecf[k].imag() - rep.reference[k].imag()) <=
                4.0 * rep.se_im[k] + rep.reference_err[k]);
    }
    REQUIRE(std::abs(rep.mean_u - rep.predicted_mean) <= 4.0 * rep.mean_se);
    REQUIRE_THROWS_AS(mc_compare(ps, 1.0, 1, panel, 10, 1), validation_error);
}

TEST_CASE("Monte Carlo histogram chi-square against the sampled density", "[global]") {
    auto ps = prime_set_from({2});
    LocalParams lp(2, 1.0, 1);
    auto iv = value_interval(lp);
    std::vector<double> grid(801);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = iv.lo + iv.length() * i / 800.0;
    }
    auto g = finite_density_convolution(ps, 1.0, 1, grid);
    auto rep = mc_compare(ps, 1.0, 1, {0.5}, 100000, 31337, &g);
    REQUIRE(rep.chi_dof > 5);
    // generous acceptance band, approximately mean + 5 sd of a chi-square
    REQUIRE(rep.chi_square <
            static_cast<double>(rep.chi_dof) + 5.0 * std::sqrt(2.0 * rep.chi_dof));
}
