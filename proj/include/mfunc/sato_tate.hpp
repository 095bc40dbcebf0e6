#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mfunc/common.hpp"

namespace mfunc {

// Quadrature for the measure (2/pi) sin^2(theta) dtheta on [0, pi].
// Gauss-Chebyshev of the second kind: with c = cos(theta) the weight becomes
// (2/pi) sqrt(1 - c^2) dc, whose n-point rule has nodes theta_i = i*pi/(n+1)
// and weights (2/(n+1)) sin^2(theta_i).  Exact for polynomials in cos(theta)
// of degree <= 2n - 1; the weights sum to 1 identically.
struct STQuadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
    int order = 0;
};

inline STQuadrature st_quadrature(int order) {
    if (order < 2) throw validation_error("quadrature order must be at least 2");
    STQuadrature q;
    q.order = order;
    q.nodes.resize(order);
    q.weights.resize(order);
    const double step = pi / (order + 1.0);
    for (int i = 0; i < order; ++i) {
        const double theta = (i + 1) * step;
        const double s = std::sin(theta);
        q.nodes[i] = theta;
        q.weights[i] = 2.0 / (order + 1.0) * s * s;
    }
    return q;
}

template <typename Fn>
double st_integrate(const STQuadrature& q, Fn&& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) acc += q.weights[i] * f(q.nodes[i]);
    return acc;
}

template <typename Fn>
complex st_integrate_complex(const STQuadrature& q, Fn&& f) {
    complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < q.nodes.size(); ++i) acc += q.weights[i] * f(q.nodes[i]);
    return acc;
}

// Cumulative mass of (2/pi) sin^2 on [0, theta]: (theta - sin(theta)cos(theta)) / pi.
inline double st_cdf(double theta) {
    if (!(theta >= 0.0 && theta <= pi)) {
        throw validation_error("st_cdf argument must lie in [0, pi]");
    }
    return (theta - std::sin(theta) * std::cos(theta)) / pi;
}

// Deterministic sampler; identical seeds give identical streams.  Uniform
// variates are built from the raw 64-bit output so the stream does not depend
// on the standard library's distribution implementation.
struct STSampler {
    explicit STSampler(std::uint64_t seed_) : seed(seed_), engine(seed_) {}
    std::uint64_t seed;
    std::mt19937_64 engine;

    double next_uniform() {
        return static_cast<double>(engine() >> 11) * 0x1.0p-53;
    }

    // Inverse-CDF draw, bisection until the bracket is below 1e-12.
    double next_angle() {
        const double u = next_uniform();
        double lo = 0.0, hi = pi;
        while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            if (st_cdf(mid) < u) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }
};

inline std::vector<double> st_sample(STSampler& sampler, std::size_t n) {
    if (n < 1) throw validation_error("sample count must be at least 1");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = sampler.next_angle();
    return out;
}

}  // namespace mfunc
