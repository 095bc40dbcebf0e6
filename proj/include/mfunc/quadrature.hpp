#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

#include "mfunc/common.hpp"

namespace mfunc {

// Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on P_n.
template <int N>
struct GaussLegendre {
    std::array<double, N> node{};
    std::array<double, N> weight{};

    GaussLegendre() {
        for (int i = 0; i < (N + 1) / 2; ++i) {
            double x = std::cos(pi * (i + 0.75) / (N + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= N; ++k) {
                    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            double w = 2.0 / ((1.0 - x * x) * dp * dp);
            node[i] = -x;
            node[N - 1 - i] = x;
            weight[i] = w;
            weight[N - 1 - i] = w;
        }
    }
};

inline const GaussLegendre<16>& gl16() {
    static const GaussLegendre<16> rule;
    return rule;
}

// Composite 16-point Gauss-Legendre over n equal panels of [a, b].
template <typename Fn>
complex integrate_panels(Fn&& f, double a, double b, std::size_t n) {
    const auto& rule = gl16();
    const double h = (b - a) / static_cast<double>(n);
    complex total{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        const double c = a + (static_cast<double>(k) + 0.5) * h;
        complex panel{0.0, 0.0};
        for (int j = 0; j < 16; ++j) {
            panel += rule.weight[j] * f(c + 0.5 * h * rule.node[j]);
        }
        total += 0.5 * h * panel;
    }
    return total;
}

// Panel-doubling refinement until two successive composite rules agree to
// tol/2.  The reported error is the last observed difference.
template <typename Fn>
certified_complex integrate_adaptive(Fn&& f, double a, double b, double tol,
                                     std::size_t initial_panels = 8,
                                     std::size_t max_panels = (std::size_t{1} << 23)) {
    if (!(tol > 0.0)) throw validation_error("quadrature tolerance must be positive");
    if (b <= a) return {complex{0.0, 0.0}, 0.0};
    std::size_t n = std::max<std::size_t>(initial_panels, 2);
    complex prev = integrate_panels(f, a, b, n);
    while (true) {
        n *= 2;
        complex next = integrate_panels(f, a, b, n);
        double diff = std::abs(next - prev);
        if (diff < 0.5 * tol) return {next, diff + 1e-16 * static_cast<double>(n)};
        if (n > max_panels) {
            throw tolerance_error("quadrature tolerance not reached within panel budget",
                                  next, diff);
        }
        prev = next;
    }
}

// As above, with the substitutions t = a + s^2 and t = b - s^2 applied on the
// two halves.  Integrable endpoint behaviour up to 1/sqrt type becomes smooth.
template <typename Fn>
certified_complex integrate_edge_regularized(Fn&& f, double a, double b, double tol,
                                             std::size_t initial_panels = 8) {
    if (b <= a) return {complex{0.0, 0.0}, 0.0};
    const double m = 0.5 * (a + b);
    auto left = [&](double s) { return f(a + s * s) * (2.0 * s); };
    auto right = [&](double s) { return f(b - s * s) * (2.0 * s); };
    const double sl = std::sqrt(m - a);
    const double sr = std::sqrt(b - m);
    certified_complex il = integrate_adaptive(left, 0.0, sl, 0.5 * tol, initial_panels);
    certified_complex ir = integrate_adaptive(right, 0.0, sr, 0.5 * tol, initial_panels);
    return {il.value + ir.value, il.err + ir.err};
}

}  // namespace mfunc
