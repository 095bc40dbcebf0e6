#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mfunc/common.hpp"

namespace mfunc {

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    if (n % 3 == 0) return n == 3;
    for (std::uint64_t d = 5; d * d <= n; d += 6) {
        if (n % d == 0 || n % (d + 2) == 0) return false;
    }
    return true;
}

// Eratosthenes up to and including `limit`.
inline std::vector<std::uint64_t> sieve_primes(std::uint64_t limit) {
    std::vector<std::uint64_t> out;
    if (limit < 2) return out;
    std::vector<bool> composite(limit + 1, false);
    for (std::uint64_t i = 2; i * i <= limit; ++i) {
        if (!composite[i]) {
            for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
        }
    }
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (!composite[i]) out.push_back(i);
    }
    return out;
}

// Calls fn(p) for every prime p in [lo, hi], ascending.  Segmented so the
// working set stays small for large ranges.
template <typename Fn>
void for_each_prime(std::uint64_t lo, std::uint64_t hi, Fn&& fn) {
    if (hi < 2 || hi < lo) return;
    lo = std::max<std::uint64_t>(lo, 2);
    std::uint64_t root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(hi))) + 2;
    std::vector<std::uint64_t> base = sieve_primes(root);
    constexpr std::uint64_t segment = 1 << 18;
    std::vector<bool> mark;
    for (std::uint64_t start = lo; start <= hi; start += segment) {
        std::uint64_t stop = std::min(hi, start + segment - 1);
        mark.assign(stop - start + 1, false);
        for (std::uint64_t p : base) {
            if (p * p > stop) break;
            std::uint64_t first = std::max(p * p, ((start + p - 1) / p) * p);
            for (std::uint64_t j = first; j <= stop; j += p) mark[j - start] = true;
        }
        for (std::uint64_t v = start; v <= stop; ++v) {
            if (v >= 2 && !mark[v - start]) fn(v);
        }
    }
}

// The primes p <= bound with p != excluded, materialized ascending.
// Immutable after construction.
struct PrimeSet {
    std::optional<std::uint64_t> excluded;
    double bound = 0.0;
    std::vector<std::uint64_t> members;
};

inline PrimeSet prime_set(std::optional<std::uint64_t> q, double y) {
    if (q && !is_prime(*q)) {
        throw validation_error("excluded level value " + std::to_string(*q) + " is not prime");
    }
    PrimeSet ps;
    ps.excluded = q;
    ps.bound = y;
    if (y >= 2.0) {
        auto limit = static_cast<std::uint64_t>(y);
        for_each_prime(2, limit, [&](std::uint64_t p) {
            if (!q || p != *q) ps.members.push_back(p);
        });
    }
    return ps;
}

inline PrimeSet prime_set_from(std::vector<std::uint64_t> primes, std::optional<std::uint64_t> q = {}) {
    PrimeSet ps;
    ps.excluded = q;
    for (std::uint64_t p : primes) {
        if (!is_prime(p)) throw validation_error(std::to_string(p) + " is not prime");
        if (q && p == *q) throw validation_error("prime set contains the excluded prime");
    }
    std::sort(primes.begin(), primes.end());
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
    ps.members = std::move(primes);
    ps.bound = ps.members.empty() ? 0.0 : static_cast<double>(ps.members.back());
    return ps;
}

// Certified upper bound on sum over primes p > y of p^(-s), for s > 1.
// Uses pi(t) <= 1.26 t / ln t (valid for all t >= 2) and partial summation:
//   sum_{p>y} p^(-s) <= 1.26 * s/(s-1) * y^(1-s) / ln y    (y >= 2).
inline double prime_tail_bound(double y, double s) {
    if (s <= 1.0) throw validation_error("prime tail bound needs s > 1");
    if (y < 2.0) y = 2.0;
    return 1.26 * s / (s - 1.0) * std::pow(y, 1.0 - s) / std::log(y);
}

}  // namespace mfunc
