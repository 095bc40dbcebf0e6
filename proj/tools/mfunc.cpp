// Command-line surface: transform tables, density grids, convolution,
// verification, Monte Carlo comparison, and eigenvalue-data summaries.
// Outputs are deterministic for a fixed configuration and embed it.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "mfunc/global.hpp"
#include "mfunc/io.hpp"
#include "mfunc/newforms.hpp"

namespace {

using namespace mfunc;

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    double sigma = 1.0;
    int r = 1;
    std::optional<std::uint64_t> q;
    double y = 0.0;
    double x_max = 200.0;
    double x_step = 0.05;
    double u_min = -2.0;
    double u_max = 4.0;
    std::size_t u_points = 601;
    double tol = 1e-8;
    std::uint64_t seed = 1;
    std::size_t samples = 100000;
    std::uint64_t p = 2;
    std::string route = "quadrature";
    std::vector<double> x_values;
    std::string input;
    std::string out;
    std::string format = "csv";
};

ParamMap base_params(const RunConfig& c) {
    ParamMap m;
    m["command"] = c.command;
    m["sigma"] = detail::fmt_double(c.sigma);
    m["r"] = std::to_string(c.r);
    if (c.q) m["q"] = std::to_string(*c.q);
    if (c.y > 0.0) m["y"] = detail::fmt_double(c.y);
    m["tol"] = detail::fmt_double(c.tol);
    m["format"] = c.format;
    return m;
}

std::vector<double> x_grid_of(const RunConfig& c) {
    if (!c.x_values.empty()) return c.x_values;
    std::vector<double> xs;
    for (double x = 0.0; x <= c.x_max + 1e-12; x += c.x_step) xs.push_back(x);
    return xs;
}

std::vector<double> u_grid_of(const RunConfig& c) {
    if (c.u_points < 2) throw usage_error("--u-points must be at least 2");
    if (!(c.u_max > c.u_min)) throw usage_error("--u-max must exceed --u-min");
    std::vector<double> us(c.u_points);
    for (std::size_t i = 0; i < c.u_points; ++i) {
        us[i] = c.u_min + (c.u_max - c.u_min) * static_cast<double>(i) /
                              static_cast<double>(c.u_points - 1);
    }
    return us;
}

void emit(const RunConfig& c, const TransformTable& t, ParamMap params) {
    std::ostringstream buffer;
    if (c.format == "csv") {
        write_csv(buffer, t, params);
    } else {
        buffer << to_json(t, params).dump(2) << "\n";
    }
    if (c.out.empty()) {
        std::cout << buffer.str();
    } else {
        std::ofstream os(c.out, std::ios::binary);
        if (!os) throw validation_error("cannot open output file " + c.out);
        os << buffer.str();
    }
}

void emit(const RunConfig& c, const DensityGrid& g, ParamMap params) {
    params["mass"] = detail::fmt_double(g.mass);
    std::ostringstream buffer;
    if (c.format == "csv") {
        write_csv(buffer, g, params);
    } else {
        buffer << to_json(g, params).dump(2) << "\n";
    }
    if (c.out.empty()) {
        std::cout << buffer.str();
    } else {
        std::ofstream os(c.out, std::ios::binary);
        if (!os) throw validation_error("cannot open output file " + c.out);
        os << buffer.str();
    }
}

void emit_text(const RunConfig& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream os(c.out, std::ios::binary);
        if (!os) throw validation_error("cannot open output file " + c.out);
        os << text;
    }
}

int run_local_transform(const RunConfig& c) {
    LocalParams lp(c.p, c.sigma, c.r);
    auto xs = x_grid_of(c);
    TransformTable t;
    t.sigma = c.sigma;
    t.r = c.r;
    t.primes = prime_set_from({c.p});
    t.x = xs;
    t.values.resize(xs.size());
    t.err.resize(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        certified_complex v = (c.route == "series") ? local_transform_series(lp, xs[i], c.tol)
                                                    : local_transform_quadrature(xs[i], lp, c.tol);
        t.values[i] = v.value;
        t.err[i] = v.err;
    });
    auto params = base_params(c);
    params["p"] = std::to_string(c.p);
    params["route"] = c.route;
    emit(c, t, params);
    return 0;
}

int run_global_transform(const RunConfig& c) {
    auto xs = x_grid_of(c);
    std::optional<PrimeSet> ps;
    if (c.y > 0.0) ps = prime_set(c.q, c.y);
    auto t = transform_table(c.q, ps, c.sigma, c.r, xs, c.tol);
    auto params = base_params(c);
    params["product"] = ps ? "finite" : "limit";
    emit(c, t, params);
    return 0;
}

int run_density(const RunConfig& c) {
    auto us = u_grid_of(c);
    DensityGrid g;
    if (c.y > 0.0) {
        auto ps = prime_set(c.q, c.y);
        g = invert_density(ps, c.sigma, c.r, us, {c.x_max, c.x_step}, c.tol);
    } else {
        g = invert_density(c.q, c.sigma, c.r, us, {c.x_max, c.x_step}, c.tol);
    }
    auto params = base_params(c);
    params["x_max"] = detail::fmt_double(c.x_max);
    params["x_step"] = detail::fmt_double(c.x_step);
    emit(c, g, params);
    return 0;
}

int run_convolve(const RunConfig& c) {
    if (!(c.y > 0.0)) throw usage_error("convolve needs --y to pick the prime set");
    auto ps = prime_set(c.q, c.y);
    auto us = u_grid_of(c);
    auto g = finite_density_convolution(ps, c.sigma, c.r, us);
    emit(c, g, base_params(c));
    return 0;
}

int run_mc_compare(const RunConfig& c) {
    if (!(c.y > 0.0)) throw usage_error("mc-compare needs --y to pick the prime set");
    auto ps = prime_set(c.q, c.y);
    std::vector<double> panel = c.x_values.empty() ? std::vector<double>{0.5, 1.0, 2.0}
                                                   : c.x_values;
    auto rep = mc_compare(ps, c.sigma, c.r, panel, c.samples, c.seed);
    std::ostringstream os;
    os.precision(12);
    os << "# mc-compare sigma=" << c.sigma << " r=" << c.r << " primes=" << ps.members.size()
       << " samples=" << rep.n_samples << " seed=" << c.seed << "\n";
    for (std::size_t k = 0; k < panel.size(); ++k) {
        os << "x=" << panel[k] << " ecf=(" << rep.ecf[k].real() << "," << rep.ecf[k].imag()
           << ")"
           << " ref=(" << rep.reference[k].real() << "," << rep.reference[k].imag() << ")"
           << " se=(" << rep.se_re[k] << "," << rep.se_im[k] << ")\n";
    }
    os << "mean_u=" << rep.mean_u << " predicted=" << rep.predicted_mean
       << " se=" << rep.mean_se << "\n";
    emit_text(c, os.str());
    return 0;
}

int run_empirical(const RunConfig& c) {
    if (c.input.empty()) throw usage_error("empirical needs --input");
    if (!(c.y > 0.0)) throw usage_error("empirical needs --y to pick the prime set");
    auto batches = parse_newforms(c.input);
    std::vector<double> panel = c.x_values.empty() ? std::vector<double>{0.5, 1.0, 2.0}
                                                   : c.x_values;
    std::ostringstream os;
    os.precision(12);
    for (const auto& batch : batches) {
        auto ps = prime_set(batch.q, c.y);
        auto mass = petersson_check(batch, 1);
        os << "# level q=" << batch.q << " m=" << batch.m << " k=" << batch.k
           << " forms=" << batch.forms.size() << " mass=" << mass.sum << "\n";
        std::size_t warned = 0;
        for (const auto& f : batch.forms) warned += f.warnings.empty() ? 0 : 1;
        if (warned > 0) os << "# records with validation warnings: " << warned << "\n";
        for (double x : panel) {
            auto avg = empirical_average(batch, x, ps, c.sigma, c.r);
            auto ref = finite_transform(ps, c.sigma, c.r, x, c.tol);
            os << "x=" << x << " avg=(" << avg.average.real() << "," << avg.average.imag()
               << ")"
               << " predicted=(" << ref.value.real() << "," << ref.value.imag() << ")\n";
        }
    }
    emit_text(c, os.str());
    return 0;
}

int run_s_r_sum(const RunConfig& c) {
    if (c.input.empty()) throw usage_error("s-r-sum needs --input");
    auto batches = parse_newforms(c.input);
    std::ostringstream os;
    os.precision(12);
    for (const auto& batch : batches) {
        const double y_lo = std::log(std::pow(static_cast<double>(batch.q), batch.m));
        for (std::size_t i = 0; i < batch.forms.size(); ++i) {
            const double s = s_r_sum(batch.forms[i], c.sigma, c.r, y_lo);
            os << "q=" << batch.q << " m=" << batch.m << " k=" << batch.k << " form=" << i
               << " s_r=" << s << "\n";
        }
    }
    emit_text(c, os.str());
    return 0;
}

// ---------------------------------------------------------------------------
// verify: one line per invariant, nonzero exit on any failure.

struct Verifier {
    bool ok = true;
    std::ostringstream log;

    void check(const std::string& name, bool pass, const std::string& detail = "") {
        log << (pass ? "ok   " : "FAIL ") << name;
        if (!pass && !detail.empty()) log << ": " << detail;
        log << "\n";
        ok = ok && pass;
    }
};

int run_verify(const RunConfig& c) {
    Verifier v;
    const double sigma = c.sigma;
    const int r = c.r;

    {
        auto ps = prime_set(std::uint64_t{7}, 10.0);
        v.check("prime-set small case", ps.members == std::vector<std::uint64_t>{2, 3, 5});
        auto small = prime_set(std::nullopt, 300.0);
        auto large = prime_set(std::nullopt, 600.0);
        v.check("prime-set monotone in bound",
                std::includes(large.members.begin(), large.members.end(), small.members.begin(),
                              small.members.end()));
    }
    {
        auto q = st_quadrature(96);
        double mass = 0.0;
        for (double w : q.weights) mass += w;
        v.check("angle-measure weights sum to 1", std::abs(mass - 1.0) < 1e-12);
        bool moments = true;
        for (int k = 0; k <= 20; ++k) {
            const double m = st_integrate(q, [&](double t) { return std::cos(k * t); });
            const double want = k == 0 ? 1.0 : (k == 2 ? -0.5 : 0.0);
            moments = moments && std::abs(m - want) < 1e-10;
        }
        v.check("cosine moments", moments);
        bool monotone = true;
        double prev = -1.0;
        for (int i = 0; i <= 100; ++i) {
            const double cdf = st_cdf(pi * i / 100.0);
            monotone = monotone && cdf >= prev;
            prev = cdf;
        }
        v.check("cdf monotone", monotone);
    }
    {
        bool round = true;
        std::mt19937_64 rng(c.seed);
        for (std::uint64_t p : {std::uint64_t{2}, std::uint64_t{17}}) {
            LocalParams lp(p, sigma, r);
            auto iv = value_interval(lp);
            std::uniform_real_distribution<double> unif(iv.lo + 1e-9, iv.hi);
            for (int i = 0; i < 64; ++i) {
                const double u = unif(rng);
                round = round && std::abs(local_log_factor(theta_of_u(u, lp), lp) - u) < 1e-12;
            }
        }
        v.check("value-map round trip", round);
    }
    {
        LocalParams lp(2, sigma, r);
        auto q = st_quadrature(96);
        bool pass = true;
        auto via_theta = [&](auto&& psi) {
            auto f = [&](double theta) {
                const double s = std::sin(theta / lp.r);
                return complex{psi(local_log_factor(theta, lp)) * 2.0 / pi * s * s, 0.0};
            };
            return integrate_adaptive(f, 0.0, pi, 1e-11).value.real();
        };
        auto via_nodes = [&](auto&& psi) {
            double acc = 0.0;
            for (std::size_t i = 0; i < q.nodes.size(); ++i) {
                acc += q.weights[i] * psi(local_log_factor(lp.r * q.nodes[i], lp));
            }
            return acc;
        };
        pass = pass && std::abs(via_theta([](double) { return 1.0; }) - 1.0) < 1e-10;
        for (auto psi : {+[](double u) { return u; }, +[](double u) { return u * u; },
                         +[](double u) { return std::cos(u); },
                         +[](double u) { return std::sin(u); }}) {
            pass = pass && std::abs(via_theta(psi) - via_nodes(psi)) < 1e-8;
        }
        v.check("change-of-variables identity", pass);
    }
    {
        auto q = st_quadrature(96);
        bool pass = true;
        for (std::uint64_t p : {std::uint64_t{2}, std::uint64_t{3}, std::uint64_t{5},
                                std::uint64_t{17}}) {
            LocalParams lp(p, sigma, r);
            const double got =
                st_integrate(q, [&](double t) { return local_log_factor(lp.r * t, lp); });
            pass = pass && std::abs(got - st_mean_log_factor(lp)) < 1e-10;
        }
        v.check("closed-form means", pass);
    }
    {
        bool pass = true;
        for (std::uint64_t p : {std::uint64_t{2}, std::uint64_t{5}}) {
            LocalParams lp(p, sigma, r);
            pass = pass &&
                   std::abs(local_transform_quadrature(0.0, lp, 1e-12).value - complex{1.0, 0.0}) <
                       1e-12;
            for (double x : {0.5, 2.0, 10.0, 100.0}) {
                auto plus = local_transform_quadrature(x, lp, 1e-10);
                auto minus = local_transform_quadrature(-x, lp, 1e-10);
                pass = pass && std::abs(plus.value) <= 1.0 + 1e-9;
                pass = pass && std::abs(minus.value - std::conj(plus.value)) < 1e-9;
            }
        }
        v.check("transform bound and symmetry", pass);
    }
    {
        bool pass = true;
        for (std::uint64_t p : {std::uint64_t{2}, std::uint64_t{5}}) {
            LocalParams lp(p, sigma, r);
            for (double x : {0.5, 2.0, 10.0}) {
                auto s = local_transform_series(lp, x, 1e-10);
                auto qd = local_transform_quadrature(x, lp, 1e-10);
                pass = pass && std::abs(s.value - qd.value) < 1e-8;
            }
        }
        v.check("series route equals quadrature route", pass);
    }
    {
        bool pass = true;
        for (std::uint64_t p : {std::uint64_t{2}, std::uint64_t{5}}) {
            LocalParams lp(p, sigma, r);
            for (double x : {0.5, 2.0, -3.0}) {
                auto table = g_coeff_table(lp, x, 8);
                // composition-sum oracle
                std::function<complex(int)> oracle = [&](int a) -> complex {
                    if (a == 0) return {1.0, 0.0};
                    complex total{0.0, 0.0};
                    std::function<void(int, int, double)> walk = [&](int remaining, int parts,
                                                                     double prod) {
                        if (remaining == 0) {
                            complex ixn{1.0, 0.0};
                            for (int n = 0; n < parts; ++n) ixn *= complex{0.0, x};
                            double fact = 1.0;
                            for (int n = 2; n <= parts; ++n) fact *= n;
                            total += ixn / fact / prod;
                            return;
                        }
                        for (int j = 1; j <= remaining; ++j) walk(remaining - j, parts + 1, prod * j);
                    };
                    walk(a, 0, 1.0);
                    return total * std::pow(lp.a, a);
                };
                for (int a = 0; a <= 8; ++a) {
                    const complex want = oracle(a);
                    pass = pass && std::abs(table.coeffs[a] - want) <=
                                       1e-12 * std::max(1e-30, std::abs(want));
                }
                auto table30 = g_coeff_table(lp, x, 30);
                for (int a = 0; a <= table30.a_max; ++a) {
                    pass = pass && std::abs(table30.coeffs[a]) <=
                                       std::pow(lp.a, a) * g_majorant(a, std::abs(x)) *
                                               (1.0 + 1e-13) +
                                           1e-300;
                }
            }
        }
        v.check("coefficient oracle and majorant", pass);
    }
    {
        LocalParams lp(11, sigma, r);
        bool pass = true;
        for (double x : {0.25, 1.0, 3.0}) {
            auto s = local_transform_series(lp, x, 1e-12);
            pass = pass && std::abs(s.value - complex{1.0, 0.0}) <= one_minus_bound(lp, x) + 1e-10;
            pass = pass && std::abs(std::abs(unit_factor(lp, x)) - 1.0) < 1e-14;
        }
        v.check("unit factor and deviation bound", pass);
    }
    {
        std::mt19937_64 rng(c.seed + 1);
        std::vector<std::uint64_t> pool = {2, 3, 5, 7, 11, 13, 17, 19};
        bool pass = true;
        for (int trial = 0; trial < 4; ++trial) {
            std::shuffle(pool.begin(), pool.end(), rng);
            auto small = prime_set_from({pool[0], pool[1]});
            auto large = prime_set_from({pool[0], pool[1], pool[2], pool[3]});
            for (double x : {0.5, 2.0, 8.0}) {
                auto lo = finite_transform(large, sigma, r, x, 1e-13);
                auto hi = finite_transform(small, sigma, r, x, 1e-13);
                pass = pass && std::abs(lo.value) <= std::abs(hi.value) + 1e-12;
            }
        }
        v.check("product monotonicity", pass);
    }
    {
        auto ps = prime_set(std::uint64_t{7}, 20.0);
        auto batch = synthetic_batch(7, 1, 4, 50, ps.members, c.seed + 2);
        bool pass = true;
        for (const auto& f : batch.forms) {
            double product = 1.0;
            for (auto p : ps.members) {
                const double a = std::pow(static_cast<double>(p), -sigma);
                product /= 1.0 - f.ap.at(p) * a + a * a;
            }
            const double via_log = std::exp(partial_log_l(f, ps, sigma, 1));
            pass = pass && std::abs(via_log - product) <= 1e-12 * std::abs(product);
            for (auto p : ps.members) {
                const double lam = f.ap.at(p);
                pass = pass && std::abs(lam * hecke_prime_power(lam, 2, false) -
                                        (hecke_prime_power(lam, 3, false) + lam)) < 1e-12;
            }
        }
        pass = pass && petersson_check(batch, 1).sum == 1.0;
        v.check("eigenvalue pipeline identities", pass);
    }

    emit_text(c, v.log.str());
    return v.ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"value-distribution toolkit for symmetric-power L-function logarithms"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--sigma", cfg.sigma, "exponent, must exceed 1/2");
        sub->add_option("--r", cfg.r, "symmetric-power class, 1 or 2");
        sub->add_option_function<std::uint64_t>(
            "--q", [&cfg](const std::uint64_t& q) { cfg.q = q; }, "excluded level prime");
        sub->add_option("--y", cfg.y, "prime bound for finite sets (omit for the limit)");
        sub->add_option("--tol", cfg.tol, "tolerance")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
        sub->add_option("--out", cfg.out, "output path (stdout when omitted)");
        sub->add_option("--format", cfg.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
    };
    auto add_xgrid = [&](CLI::App* sub) {
        sub->add_option("--x", cfg.x_values, "explicit x values (repeatable)");
        sub->add_option("--x-max", cfg.x_max, "x grid extent")->capture_default_str();
        sub->add_option("--x-step", cfg.x_step, "x grid step")->capture_default_str();
    };
    auto add_ugrid = [&](CLI::App* sub) {
        sub->add_option("--u-min", cfg.u_min, "u grid start")->capture_default_str();
        sub->add_option("--u-max", cfg.u_max, "u grid end")->capture_default_str();
        sub->add_option("--u-points", cfg.u_points, "u grid size")->capture_default_str();
    };

    auto* lt = app.add_subcommand("local-transform", "one local factor on an x grid");
    add_common(lt);
    add_xgrid(lt);
    lt->add_option("--p", cfg.p, "prime of the local factor")->required();
    lt->add_option("--route", cfg.route, "quadrature or series")
        ->check(CLI::IsMember({"quadrature", "series"}))
        ->capture_default_str();

    auto* gt = app.add_subcommand("global-transform", "finite or limit product on an x grid");
    add_common(gt);
    add_xgrid(gt);

    auto* de = app.add_subcommand("density", "Fourier inversion to the value density");
    add_common(de);
    add_xgrid(de);
    add_ugrid(de);

    auto* cv = app.add_subcommand("convolve", "finite-set density by convolution");
    add_common(cv);
    add_ugrid(cv);

    auto* vf = app.add_subcommand("verify", "run the invariant suite");
    add_common(vf);

    auto* mc = app.add_subcommand("mc-compare", "Monte Carlo vs deterministic transform");
    add_common(mc);
    mc->add_option("--x", cfg.x_values, "characteristic-function panel");
    mc->add_option("--samples", cfg.samples, "sample count")->capture_default_str();

    auto* em = app.add_subcommand("empirical", "averages over an eigenvalue data file");
    add_common(em);
    em->add_option("--x", cfg.x_values, "characteristic-function panel");
    em->add_option("--input", cfg.input, "newform data file")->required();

    auto* sr = app.add_subcommand("s-r-sum", "damped eigenvalue sums per form");
    add_common(sr);
    sr->add_option("--input", cfg.input, "newform data file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!(cfg.sigma > 0.5)) throw usage_error("--sigma must exceed 0.5");
        if (cfg.r != 1 && cfg.r != 2) throw usage_error("--r must be 1 or 2");
        if (!(cfg.tol > 0.0)) throw usage_error("--tol must be positive");
        if (app.got_subcommand(lt)) {
            cfg.command = "local-transform";
            return run_local_transform(cfg);
        }
        if (app.got_subcommand(gt)) {
            cfg.command = "global-transform";
            return run_global_transform(cfg);
        }
        if (app.got_subcommand(de)) {
            cfg.command = "density";
            return run_density(cfg);
        }
        if (app.got_subcommand(cv)) {
            cfg.command = "convolve";
            return run_convolve(cfg);
        }
        if (app.got_subcommand(vf)) {
            cfg.command = "verify";
            return run_verify(cfg);
        }
        if (app.got_subcommand(mc)) {
            cfg.command = "mc-compare";
            return run_mc_compare(cfg);
        }
        if (app.got_subcommand(em)) {
            cfg.command = "empirical";
            return run_empirical(cfg);
        }
        if (app.got_subcommand(sr)) {
            cfg.command = "s-r-sum";
            return run_s_r_sum(cfg);
        }
        throw usage_error("no command selected");
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const parse_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const validation_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const tolerance_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    }
}
