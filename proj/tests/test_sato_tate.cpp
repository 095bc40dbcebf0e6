#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "mfunc/sato_tate.hpp"

using namespace mfunc;

TEST_CASE("weights form a probability measure and nodes stay in range", "[sato_tate]") {
    for (int order : {2, 5, 16, 96}) {
        auto q = st_quadrature(order);
        double mass = 0.0;
        for (double w : q.weights) {
            REQUIRE(w > 0.0);
            mass += w;
        }
        REQUIRE_THAT(mass, Catch::Matchers::WithinAbs(1.0, 1e-12));
        for (double t : q.nodes) {
            REQUIRE(t >= 0.0);
            REQUIRE(t <= pi);
        }
    }
    REQUIRE_THROWS_AS(st_quadrature(1), validation_error);
}

TEST_CASE("cosine moments: 1 at k=0, -1/2 at k=2, 0 otherwise", "[sato_tate]") {
    auto q = st_quadrature(32);
    for (int k = 0; k <= 2 * 32 - 2; ++k) {
        const double got = st_integrate(q, [&](double t) { return std::cos(k * t); });
        const double expected = (k == 0) ? 1.0 : (k == 2 ? -0.5 : 0.0);
        REQUIRE_THAT(got, Catch::Matchers::WithinAbs(expected, 1e-10));
    }
}

TEST_CASE("cdf endpoints, midpoint, and monotonicity", "[sato_tate]") {
    REQUIRE(st_cdf(0.0) == 0.0);
    REQUIRE_THAT(st_cdf(pi), Catch::Matchers::WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(st_cdf(pi / 2), Catch::Matchers::WithinAbs(0.5, 1e-15));
    double prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
        double c = st_cdf(pi * i / 200.0);
        REQUIRE(c > prev);
        prev = c;
    }
    REQUIRE_THROWS_AS(st_cdf(-0.1), validation_error);
    REQUIRE_THROWS_AS(st_cdf(pi + 0.1), validation_error);
}

TEST_CASE("equal seeds give identical streams", "[sato_tate]") {
    STSampler s1(12345), s2(12345);
    auto a = st_sample(s1, 1000);
    auto b = st_sample(s2, 1000);
    REQUIRE(a == b);
}

TEST_CASE("sampled cos(2 theta) mean approaches -1/2", "[sato_tate]") {
    STSampler s(987654321);
    const std::size_t n = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = std::cos(2.0 * s.next_angle());
        sum += c;
        sumsq += c * c;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    const double se = std::sqrt(var / n);
    REQUIRE(std::abs(mean + 0.5) < 3.0 * se);
}

TEST_CASE("Kolmogorov-Smirnov against the cdf at the 1% level", "[sato_tate]") {
    STSampler s(424242);
    const std::size_t n = 100000;
    auto draws = st_sample(s, n);
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = st_cdf(draws[i]);
        ks = std::max(ks, std::abs(c - static_cast<double>(i) / n));
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - c));
    }
    REQUIRE(ks < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("inversion respects the target bracket width", "[sato_tate]") {
    STSampler s(7);
    for (int i = 0; i < 100; ++i) {
        const double theta = s.next_angle();
        REQUIRE(theta >= 0.0);
        REQUIRE(theta <= pi);
    }
}
