#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mfunc/common.hpp"
#include "mfunc/local.hpp"
#include "mfunc/primes.hpp"
#include "mfunc/sato_tate.hpp"

namespace mfunc {

// One primitive form of weight k and level q^m: normalized prime eigenvalues
// and the externally supplied harmonic weight.  Invariant violations found
// at parse time are collected per record, not fatal.
struct NewformRecord {
    std::uint64_t q = 0;
    int m = 1;
    int k = 2;
    double harmonic_weight = 0.0;
    std::map<std::uint64_t, double> ap;
    std::vector<std::string> warnings;
};

struct LevelBatch {
    std::uint64_t q = 0;
    int m = 1;
    int k = 2;
    std::vector<NewformRecord> forms;
};

namespace detail {

inline void validate_record(NewformRecord& rec) {
    if (!((rec.k >= 2 && rec.k < 12) || rec.k == 14)) {
        rec.warnings.push_back("weight " + std::to_string(rec.k) +
                               " outside the supported construction range");
    }
    if (rec.k % 2 != 0) {
        rec.warnings.push_back("odd weight " + std::to_string(rec.k));
    }
    for (const auto& [p, lam] : rec.ap) {
        if (p == rec.q) {
            if (rec.m == 1) {
                const double target = 1.0 / static_cast<double>(rec.q);
                if (std::abs(lam * lam - target) > 1e-6) {
                    rec.warnings.push_back("level eigenvalue at p=" + std::to_string(p) +
                                           " fails lambda^2 = 1/q");
                }
            } else if (lam != 0.0) {
                rec.warnings.push_back("level eigenvalue at p=" + std::to_string(p) +
                                       " should vanish for m >= 2");
            }
        } else if (std::abs(lam) > 2.0) {
            rec.warnings.push_back("Deligne bound violated at p=" + std::to_string(p));
        }
    }
}

}  // namespace detail

// Line-oriented JSON: one object per line with keys q, m, k, harmonic_weight
// and "ap" mapping decimal prime strings to normalized eigenvalues.  Lines
// starting with '#' are skipped.  Records are grouped by (q, m, k) in order
// of first appearance.
inline std::vector<LevelBatch> parse_newforms(std::istream& in) {
    std::vector<LevelBatch> batches;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw parse_error("malformed JSON record", line_no);
        }
        NewformRecord rec;
        try {
            rec.q = j.at("q").get<std::uint64_t>();
            rec.m = j.at("m").get<int>();
            rec.k = j.at("k").get<int>();
            rec.harmonic_weight = j.at("harmonic_weight").get<double>();
            for (const auto& [key, value] : j.at("ap").items()) {
                std::uint64_t p = 0;
                std::size_t used = 0;
                try {
                    p = std::stoull(key, &used);
                } catch (const std::exception&) {
                    throw parse_error("non-numeric prime key '" + key + "'", line_no);
                }
                if (used != key.size()) throw parse_error("non-numeric prime key '" + key + "'", line_no);
                if (!is_prime(p)) throw parse_error("eigenvalue key " + key + " is not prime", line_no);
                rec.ap[p] = value.get<double>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(std::string("missing or ill-typed field: ") + e.what(), line_no);
        }
        if (!is_prime(rec.q)) throw parse_error("level base q is not prime", line_no);
        if (rec.m < 1) throw parse_error("level exponent m must be >= 1", line_no);
        if (!(rec.harmonic_weight > 0.0)) throw parse_error("harmonic weight must be positive", line_no);
        detail::validate_record(rec);
        auto it = std::find_if(batches.begin(), batches.end(), [&](const LevelBatch& b) {
            return b.q == rec.q && b.m == rec.m && b.k == rec.k;
        });
        if (it == batches.end()) {
            batches.push_back({rec.q, rec.m, rec.k, {}});
            it = batches.end() - 1;
        }
        it->forms.push_back(std::move(rec));
    }
    return batches;
}

inline std::vector<LevelBatch> parse_newforms(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open newform file " + path);
    return parse_newforms(in);
}

// Satake angle from a normalized eigenvalue, clamped to [-2, 2] to absorb
// rounding in external data.
inline double satake_angle(double lambda) {
    return std::acos(std::min(1.0, std::max(-1.0, 0.5 * lambda)));
}

// Hecke eigenvalue at a prime power.  At good primes the recursion
//   lambda(p^(l+1)) = lambda(p) lambda(p^l) - lambda(p^(l-1))
// realizes lambda(p^l) = sum_h alpha^(l-h) beta^h; at the level prime the
// eigenvalues are plainly multiplicative.
inline double hecke_prime_power(double lambda_p, int exponent, bool divides_level) {
    if (exponent == 0) return 1.0;
    if (divides_level) return std::pow(lambda_p, exponent);
    double prev = 1.0, cur = lambda_p;
    for (int l = 1; l < exponent; ++l) {
        const double next = lambda_p * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

inline double hecke_eigenvalue(const NewformRecord& rec, std::uint64_t n) {
    double out = 1.0;
    std::uint64_t rest = n;
    for (std::uint64_t d = 2; d * d <= rest; ++d) {
        if (rest % d != 0) continue;
        int e = 0;
        while (rest % d == 0) {
            rest /= d;
            ++e;
        }
        auto it = rec.ap.find(d);
        if (it == rec.ap.end()) {
            throw validation_error("eigenvalue at prime " + std::to_string(d) + " not available");
        }
        out *= hecke_prime_power(it->second, e, d == rec.q);
    }
    if (rest > 1) {
        auto it = rec.ap.find(rest);
        if (it == rec.ap.end()) {
            throw validation_error("eigenvalue at prime " + std::to_string(rest) + " not available");
        }
        out *= hecke_prime_power(it->second, 1, rest == rec.q);
    }
    return out;
}

// Partial log L value over the prime set: the sum of real local log factors
// at the r-fold Satake angles.
inline double partial_log_l(const NewformRecord& rec, const PrimeSet& ps, double sigma, int r) {
    if (r != 1 && r != 2) throw validation_error("symmetric-power class must be 1 or 2");
    std::string missing;
    double total = 0.0;
    for (std::uint64_t p : ps.members) {
        if (p == rec.q) {
            throw validation_error("prime set contains the level prime " + std::to_string(p));
        }
        auto it = rec.ap.find(p);
        if (it == rec.ap.end()) {
            missing += (missing.empty() ? "" : ", ") + std::to_string(p);
            continue;
        }
        LocalParams lp(p, sigma, r);
        total += local_log_factor(lp.r * satake_angle(it->second), lp);
    }
    if (!missing.empty()) {
        throw validation_error("eigenvalues missing at primes: " + missing);
    }
    return total;
}

struct EmpiricalAverage {
    complex average{0.0, 0.0};  // sum of weight * exp(i x partial log L)
    double mass = 0.0;          // sum of weights, expected near 1 for full levels
};

inline EmpiricalAverage empirical_average(const LevelBatch& batch, double x, const PrimeSet& ps,
                                          double sigma, int r) {
    EmpiricalAverage out;
    for (const auto& f : batch.forms) {
        const double u = partial_log_l(f, ps, sigma, r);
        out.average += f.harmonic_weight * std::polar(1.0, x * u);
        out.mass += f.harmonic_weight;
    }
    return out;
}

struct PeterssonCheck {
    double sum = 0.0;       // weighted sum of lambda_f(n)
    double expected = 0.0;  // 1 when n = 1, else 0
    double bound = 0.0;     // n^((k-1)/2) min(q^(1/2-k), q^(-m-1/2)), constant unknown
};

inline PeterssonCheck petersson_check(const LevelBatch& batch, std::uint64_t n) {
    if (batch.forms.empty()) throw validation_error("batch is empty");
    PeterssonCheck out;
    for (const auto& f : batch.forms) {
        out.sum += f.harmonic_weight * hecke_eigenvalue(f, n);
    }
    out.expected = (n == 1) ? 1.0 : 0.0;
    const double qd = static_cast<double>(batch.q);
    const double k = batch.k;
    out.bound = std::pow(static_cast<double>(n), 0.5 * (k - 1.0)) *
                std::min(std::pow(qd, 0.5 - k), std::pow(qd, -batch.m - 0.5));
    return out;
}

// Exponentially damped eigenvalue sum over primes above y_lo:
//   sum lambda_f(p^r) p^(-sigma) exp(-p / Q),  Q = q^(m / ((k-1) r)),
// cut where the damping falls below 1e-16.
inline double s_r_sum(const NewformRecord& rec, double sigma, int r, double y_lo) {
    if (r != 1 && r != 2) throw validation_error("symmetric-power class must be 1 or 2");
    const double Q = std::pow(static_cast<double>(rec.q),
                              static_cast<double>(rec.m) / ((rec.k - 1.0) * r));
    const double p_cut = Q * 16.0 * std::log(10.0);  // e^(-p/Q) < 1e-16 beyond
    double total = 0.0;
    std::uint64_t bad = 0;
    for_each_prime(static_cast<std::uint64_t>(std::floor(y_lo)) + 1,
                   static_cast<std::uint64_t>(std::ceil(p_cut)), [&](std::uint64_t p) {
                       if (p == rec.q || bad != 0) return;
                       if (static_cast<double>(p) <= y_lo) return;
                       auto it = rec.ap.find(p);
                       if (it == rec.ap.end()) {
                           bad = p;
                           return;
                       }
                       const double lam_pr = hecke_prime_power(it->second, r, false);
                       total += lam_pr * std::pow(static_cast<double>(p), -sigma) *
                                std::exp(-static_cast<double>(p) / Q);
                   });
    if (bad != 0) {
        throw validation_error("eigenvalue coverage stops before prime " + std::to_string(bad));
    }
    return total;
}

// Synthetic ensemble: angles drawn from the sin^2 measure, uniform weights
// that sum to 1 exactly (the last weight closes the gap).  Makes the whole
// empirical pipeline testable without external data.
inline LevelBatch synthetic_batch(std::uint64_t q, int m, int k, std::size_t n_forms,
                                  const std::vector<std::uint64_t>& primes,
                                  std::uint64_t seed) {
    if (n_forms == 0) throw validation_error("need at least one form");
    LevelBatch batch{q, m, k, {}};
    batch.forms.reserve(n_forms);
    STSampler sampler(seed);
    const double w = 1.0 / static_cast<double>(n_forms);
    double partial = 0.0;
    for (std::size_t i = 0; i < n_forms; ++i) {
        NewformRecord rec;
        rec.q = q;
        rec.m = m;
        rec.k = k;
        rec.harmonic_weight = (i + 1 == n_forms) ? 1.0 - partial : w;
        partial += rec.harmonic_weight;
        for (std::uint64_t p : primes) {
            if (p == q) continue;
            rec.ap[p] = 2.0 * std::cos(sampler.next_angle());
        }
        batch.forms.push_back(std::move(rec));
    }
    return batch;
}

}  // namespace mfunc
