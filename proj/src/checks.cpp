#include "eotlab/checks.hpp"

#include <array>
#include <cmath>

#include <json.hpp>

#include "eotlab/bounds.hpp"
#include "eotlab/covering.hpp"
#include "eotlab/eot.hpp"
#include "eotlab/rng.hpp"
#include "eotlab/transport.hpp"

namespace eotlab {

nlohmann::json report_to_json(const CheckReport& r) {
    return nlohmann::json{{"name", r.name},           {"passed", r.passed},
                          {"checked", r.checked},     {"violations", r.violations},
                          {"worst_gap", r.worst_gap}, {"detail", r.detail}};
}

}  // namespace eotlab

namespace eotlab::checks {

namespace {

Point random_point(rng::Xoshiro256pp& gen, std::size_t dim, double scale) {
    Point p(dim);
    for (auto& v : p) v = scale * (2.0 * gen.uniform01() - 1.0);
    return p;
}

DiscreteMeasure random_measure(rng::Xoshiro256pp& gen, std::size_t atoms, std::size_t dim,
                               double scale, bool uniform) {
    std::vector<Point> pts;
    std::vector<double> wts(atoms);
    for (std::size_t i = 0; i < atoms; ++i) pts.push_back(random_point(gen, dim, scale));
    if (uniform) {
        std::fill(wts.begin(), wts.end(), 1.0 / static_cast<double>(atoms));
    } else {
        double total = 0.0;
        for (auto& w : wts) {
            w = 0.05 + gen.uniform01();
            total += w;
        }
        for (auto& w : wts) w /= total;
    }
    return make_measure(std::move(pts), std::move(wts));
}

CheckReport envelope_sweep(double p, std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    std::vector<std::pair<double, double>> grid;
    grid.reserve(10000);
    for (int i = 0; i < 10000; ++i)
        grid.push_back({100.0 * gen.uniform_open01(), 100.0 * gen.uniform_open01()});
    CheckReport r = costs::check_envelope(power_cost(p), grid);
    r.name = "cost_envelope_p" + std::to_string(static_cast<int>(p));
    return r;
}

CheckReport pointwise_sweep(std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    std::vector<std::pair<Point, Point>> pairs;
    for (int i = 0; i < 2000; ++i)
        pairs.push_back({random_point(gen, 3, 5.0), random_point(gen, 3, 5.0)});
    CheckReport r = costs::pointwise_bound_check(power_cost(2.0, 1.0), pairs);
    r.name = "cost_pointwise_p2";
    return r;
}

CheckReport gamma_identity_sweep() {
    CheckReport r;
    r.name = "gamma_identity_s1";
    for (double x : {3.0, 7.0, 29.0, 1e3, 1e6}) {
        const double lhs = bounds::incomplete_gamma(1.0, std::log(x));
        r.note(std::abs(lhs * x - 1.0) - 1e-13,
               "Gamma(1, log x) != 1/x at x=" + format_g17(x));
    }
    return r;
}

CheckReport gamma_closed_forms() {
    CheckReport r;
    r.name = "gamma_closed_forms";
    for (double x : {0.1, 0.5, 1.0, 2.5, 7.0, 20.0}) {
        const double got = bounds::incomplete_gamma(2.0, x);
        const double want = (1.0 + x) * std::exp(-x);
        r.note(std::abs(got - want) / want - 1e-10, "Gamma(2,x) mismatch");
    }
    const double half = bounds::incomplete_gamma(0.5, 0.0);
    r.note(std::abs(half - std::sqrt(3.14159265358979323846)) / half - 1e-10,
           "Gamma(1/2) mismatch");
    return r;
}

CheckReport gamma_tail_sweep() {
    CheckReport r;
    r.name = "gamma_tail_grid";
    for (double s = 0.25; s <= 8.0; s *= 1.5) {
        const double base = std::max(4.0 * s * s, std::exp(1.0));
        for (double mult : {1.0, 10.0, 100.0}) {
            CheckReport one = bounds::gamma_tail_check(s, base * mult);
            r.note(one.worst_gap, one.detail);
        }
    }
    return r;
}

CheckReport log_linear_sweep() {
    CheckReport r;
    r.name = "log_linear_grid";
    for (double a = 0.05; a <= 100.0; a *= 1.7) {
        for (double mult : {1.0, 2.0, 10.0}) {
            CheckReport one = bounds::log_linear_check(a, a * a * mult);
            r.note(one.worst_gap, one.detail);
        }
    }
    return r;
}

CheckReport binomial_sweep() {
    CheckReport r;
    r.name = "binomial_sums";
    for (std::int64_t n = 4; n <= 1024; n *= 2) {
        const double dn = static_cast<double>(n);
        CheckReport one = bounds::binomial_sum_check(n, 1.0 - 2.0 / (dn * dn));
        r.note(one.worst_gap, one.detail);
    }
    return r;
}

CheckReport truncation_floor_sweep() {
    CheckReport r;
    r.name = "truncation_radius_floor";
    for (double c : {0.1, 1.0, 5.0}) {
        for (double alpha : {1.0, 1.5, 2.0}) {
            for (double p : {2.0, 3.0}) {
                for (std::int64_t n : {4, 64, 4096}) {
                    const TailProfile profile = make_tail_profile(c, alpha);
                    const double radius = bounds::truncation_radius(profile, p, n);
                    const double lhs = p * std::log(static_cast<double>(n));
                    const double rhs = c * std::pow(radius, alpha);
                    r.note(lhs - rhs, "radius floor violated");
                }
            }
        }
    }
    return r;
}

CheckReport scaling_sweep(std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    CheckReport r;
    r.name = "scaling_identity";
    for (int k = 0; k < 5; ++k) {
        const auto mu = random_measure(gen, 4 + (k % 3), 2, 1.0, k % 2 == 0);
        const auto nu = random_measure(gen, 3 + (k % 4), 2, 1.0, k % 2 == 1);
        const double eps = std::array{0.3, 1.0, 2.5, 0.7, 1.7}[static_cast<std::size_t>(k)];
        CheckReport one = eot::scaling_check(mu, nu, power_cost(2.0), eps);
        r.note(one.worst_gap, one.detail);
    }
    return r;
}

CheckReport duality_sweep(std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    CheckReport r;
    r.name = "duality_gap";
    for (int k = 0; k < 5; ++k) {
        const auto mu = random_measure(gen, 6, 2, 1.0, false);
        const auto nu = random_measure(gen, 5, 2, 1.0, true);
        SolverConfig cfg;
        cfg.epsilon = k % 2 == 0 ? 1.0 : 0.4;
        const EotSolution sol = eot::solve(mu, nu, power_cost(2.0), cfg);
        const double primal = eot::primal_value(sol.plan, mu, nu, power_cost(2.0), cfg.epsilon);
        const double dual = eot::dual_value(sol.f, sol.g, mu, nu, power_cost(2.0), cfg.epsilon);
        r.note(std::abs(primal - dual) - 1e-7 * (1.0 + std::abs(primal)),
               "duality gap too large");
    }
    return r;
}

CheckReport potential_sweep(std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    CheckReport r;
    r.name = "potential_bounds";
    for (double p : {2.0, 3.0}) {
        const auto mu = random_measure(gen, 20, 2, 0.57, true);   // inside the unit ball
        const auto nu = random_measure(gen, 18, 2, 0.57, false);
        SolverConfig cfg;
        cfg.epsilon = 0.5;
        const EotSolution sol = eot::solve(mu, nu, power_cost(p), cfg);
        CheckReport one = eot::potential_bounds_check(sol, 1.0, 1.0, power_cost(p));
        r.note(one.worst_gap, one.detail);
    }
    return r;
}

CheckReport density_norm_sweep(std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    CheckReport r;
    r.name = "density_norm_bound";
    for (double eps : {0.1, 1.0}) {
        const auto mu = random_measure(gen, 12, 2, 0.57, true);
        const auto nu = random_measure(gen, 12, 2, 0.57, true);
        SolverConfig cfg;
        cfg.epsilon = eps;
        const EotSolution sol = eot::solve(mu, nu, power_cost(2.0), cfg);
        const Matrix dens = eot::density(sol);
        std::vector<double> terms;
        for (std::size_t i = 0; i < dens.rows; ++i)
            for (std::size_t j = 0; j < dens.cols; ++j)
                terms.push_back(mu.weights[i] * nu.weights[j] * dens(i, j) * dens(i, j));
        const double norm2 = kahan_sum(terms);
        const double bound =
            covering::density_norm_bound(mu, nu, 1.0, 1.0, power_cost(2.0), eps);
        r.note(norm2 - bound, "density norm bound violated");
    }
    return r;
}

CheckReport truncation_wp_sweep(std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    CheckReport r;
    r.name = "truncation_wp_vs_exact";
    int done = 0;
    while (done < 40) {
        const std::size_t atoms = 3 + static_cast<std::size_t>(gen.next() % 4);
        const auto m = random_measure(gen, atoms, 2, 2.0, true);
        const double radius = 0.4 + 2.2 * gen.uniform01();
        if (measures::tail_mass(m, radius) == 0.0) continue;
        bool has_inside = false;
        for (const auto& pt : m.points) has_inside |= norm(pt) < radius;
        if (!has_inside) continue;
        const double bound = bounds::truncation_wp_bound(m, radius, 2.0);
        const double exact =
            transport::exact_wp_p(m, measures::restrict(m, radius), 2.0);
        r.note(exact - bound - 1e-9, "truncation bound below exact distance");
        ++done;
    }
    return r;
}

CheckReport stability_sweep(std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    CheckReport r;
    r.name = "stability_gap";
    for (int k = 0; k < 40; ++k) {
        const auto mu1 = random_measure(gen, 4, 2, 1.0, true);
        const auto mu2 = random_measure(gen, 4, 2, 1.0, true);
        const auto tmu1 = random_measure(gen, 4, 2, 1.0, true);
        const auto tmu2 = random_measure(gen, 4, 2, 1.0, true);
        CheckReport one =
            bounds::stability_gap_check(mu1, mu2, tmu1, tmu2, power_cost(2.0), 1.0);
        r.note(one.worst_gap, one.detail);
    }
    return r;
}

CheckReport restrict_moment_sweep(std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    CheckReport r;
    r.name = "restrict_moment_monotone";
    for (int k = 0; k < 60; ++k) {
        const auto m = random_measure(gen, 5 + static_cast<std::size_t>(gen.next() % 10), 2,
                                      2.0, k % 2 == 0);
        const double radius = 0.5 + 2.0 * gen.uniform01();
        bool has_inside = false;
        for (const auto& pt : m.points) has_inside |= norm(pt) < radius;
        if (!has_inside) continue;
        const auto inside = measures::restrict(m, radius);
        for (double p : {1.0, 2.0, 3.0, 4.0})
            r.note(measures::moment(inside, p) - measures::moment(m, p) - 1e-12,
                   "restriction increased a moment");
    }
    return r;
}

}  // namespace

std::vector<CheckReport> run_all(std::uint64_t seed) {
    std::vector<CheckReport> reports;
    reports.push_back(envelope_sweep(2.0, rng::derive_stream(seed, {1})));
    reports.push_back(envelope_sweep(3.0, rng::derive_stream(seed, {2})));
    reports.push_back(pointwise_sweep(rng::derive_stream(seed, {3})));
    reports.push_back(gamma_identity_sweep());
    reports.push_back(gamma_closed_forms());
    reports.push_back(gamma_tail_sweep());
    reports.push_back(log_linear_sweep());
    reports.push_back(binomial_sweep());
    reports.push_back(truncation_floor_sweep());
    reports.push_back(scaling_sweep(rng::derive_stream(seed, {4})));
    reports.push_back(duality_sweep(rng::derive_stream(seed, {5})));
    reports.push_back(potential_sweep(rng::derive_stream(seed, {6})));
    reports.push_back(density_norm_sweep(rng::derive_stream(seed, {7})));
    reports.push_back(truncation_wp_sweep(rng::derive_stream(seed, {8})));
    reports.push_back(stability_sweep(rng::derive_stream(seed, {9})));
    reports.push_back(restrict_moment_sweep(rng::derive_stream(seed, {10})));
    return reports;
}

}  // namespace eotlab::checks
