#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "eotlab/bounds.hpp"
#include "eotlab/covering.hpp"
#include "eotlab/errors.hpp"
#include "eotlab/rng.hpp"
#include "eotlab/transport.hpp"
#include "oracles.hpp"

using namespace eotlab;

TEST_CASE("truncation radii evaluate the closed form") {
    // c=1, alpha=1, p=2: 4 * 2 * 1 * 1 * 4 * log n
    const TailProfile exp_profile = make_tail_profile(1.0, 1.0);
    for (std::int64_t n : {4, 64, 1024})
        CHECK(bounds::truncation_radius(exp_profile, 2.0, n) ==
              doctest::Approx(32.0 * std::log(static_cast<double>(n))).epsilon(1e-14));

    const TailProfile gauss_profile = make_tail_profile(1.0, 2.0);
    for (std::int64_t n : {4, 64, 1024})
        CHECK(bounds::truncation_radius(gauss_profile, 2.0, n) ==
              doctest::Approx(std::sqrt(8.0 * std::log(static_cast<double>(n))))
                  .epsilon(1e-14));

    CHECK(bounds::truncation_radius(gauss_profile, 2.0, 64) >
          bounds::truncation_radius(gauss_profile, 2.0, 16));
    CHECK_THROWS_AS(bounds::truncation_radius(gauss_profile, 2.0, 3), std::invalid_argument);
}

TEST_CASE("truncation radii satisfy the tail-killing floor") {
    for (double c : {0.2, 1.0, 4.0}) {
        for (double alpha : {1.0, 1.3, 2.0}) {
            for (double p : {2.0, 3.0}) {
                for (std::int64_t n : {4, 16, 1024, 65536}) {
                    const TailProfile profile = make_tail_profile(c, alpha);
                    const double r = bounds::truncation_radius(profile, p, n);
                    CHECK(c * std::pow(r, alpha) >=
                          p * std::log(static_cast<double>(n)) - 1e-9);
                }
            }
        }
    }
}

TEST_CASE("incomplete gamma matches closed forms and quadrature") {
    for (double x : {0.0, 0.3, 1.0, 4.0, 19.0})
        CHECK(bounds::incomplete_gamma(1.0, x) ==
              doctest::Approx(std::exp(-x)).epsilon(1e-14));
    for (double x : {0.1, 0.9, 2.0, 11.0})
        CHECK(bounds::incomplete_gamma(2.0, x) ==
              doctest::Approx((1.0 + x) * std::exp(-x)).epsilon(1e-10));
    CHECK(bounds::incomplete_gamma(0.5, 0.0) ==
          doctest::Approx(std::sqrt(3.14159265358979323846)).epsilon(1e-10));

    for (double s : {0.25, 0.5, 1.7, 3.2, 7.9}) {
        CHECK(bounds::incomplete_gamma(s, 0.0) ==
              doctest::Approx(std::tgamma(s)).epsilon(1e-10));
        for (double x : {0.05, 0.7, 1.9, 6.0, 21.0}) {
            const double got = bounds::incomplete_gamma(s, x);
            const double want = oracles::gamma_quadrature(s, x);
            CHECK(got == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("incomplete gamma decreases in x") {
    for (double s : {0.4, 1.0, 2.7}) {
        double prev = bounds::incomplete_gamma(s, 0.0);
        for (double x = 0.25; x < 12.0; x += 0.25) {
            const double cur = bounds::incomplete_gamma(s, x);
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("gamma tail bound holds on its domain and rejects below it") {
    // s = 1 is the exact case: Gamma(1, log x) = 1/x
    for (double x : {4.0, 10.0, 1e4})
        CHECK(bounds::gamma_tail_check(1.0, x).passed);
    CHECK(bounds::gamma_tail_check(0.5, std::exp(1.0)).passed);  // ~0.2788 <= 1/e

    for (double s = 0.25; s <= 8.0; s *= 1.4) {
        const double base = std::max(4.0 * s * s, std::exp(1.0));
        for (double mult : {1.0, 10.0, 100.0})
            CHECK(bounds::gamma_tail_check(s, base * mult).passed);
    }
    CHECK_THROWS_AS(bounds::gamma_tail_check(2.0, 2.0), DomainViolation);
}

TEST_CASE("log-linear bound holds on its domain") {
    CHECK(bounds::log_linear_check(1.0, 1.0).passed);
    CHECK(bounds::log_linear_check(std::exp(1.0), std::exp(2.0)).passed);
    for (double a = 0.02; a <= 100.0; a *= 1.9)
        for (double mult : {1.0, 2.0, 10.0})
            CHECK(bounds::log_linear_check(a, a * a * mult).passed);
    CHECK_THROWS_AS(bounds::log_linear_check(4.0, 15.0), DomainViolation);
}

TEST_CASE("moment bound specializes and dominates Monte Carlo moments") {
    const TailProfile unit_exp = make_tail_profile(1.0, 1.0);
    CHECK(bounds::moment_bound(unit_exp, 1.0) == doctest::Approx(2.0).epsilon(1e-12));

    // radial Exp(1): M_1 = 1 and the envelope gives 2
    const auto pts = measures::sample(exponential_sampler(1, 1.0), 50000, 321);
    const auto emp = measures::empirical(pts);
    const double m1 = measures::moment(emp, 1.0);
    CHECK(m1 <= bounds::moment_bound(unit_exp, 1.0));
    CHECK(m1 == doctest::Approx(1.0).epsilon(0.05));

    // the tail bound vanishes as the radius grows
    double prev = bounds::moment_bound(unit_exp, 2.0, 1.0);
    for (double r : {2.0, 4.0, 8.0, 16.0}) {
        const double cur = bounds::moment_bound(unit_exp, 2.0, r);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK(bounds::moment_bound(unit_exp, 2.0, 64.0) < 1e-20);

    // Monte Carlo check of the tail-moment bound at a fixed radius
    const TailProfile gauss = gaussian_tail_profile(2, 1.0);
    const auto gpts = measures::sample(gaussian_sampler(2, 1.0), 50000, 99);
    const auto gemp = measures::empirical(gpts);
    for (double r : {1.0, 2.0, 3.0}) {
        double tail_moment = 0.0;
        for (std::size_t i = 0; i < gemp.size(); ++i)
            if (norm(gemp.points[i]) >= r)
                tail_moment += gemp.weights[i] * std::pow(norm(gemp.points[i]), 2.0);
        CHECK(tail_moment <= bounds::moment_bound(gauss, 2.0, r) + 0.01);
    }
}

TEST_CASE("stability constant is the bracketed moment sum to the p-1") {
    const auto zero = dirac({0.0, 0.0});
    CHECK(bounds::stability_constant(zero, zero, zero, zero, 2.0) == 0.0);

    const DiscreteMeasure pm = make_measure({{-1.0}, {1.0}}, {0.5, 0.5});
    CHECK(bounds::stability_constant(pm, pm, pm, pm, 2.0) ==
          doctest::Approx(4.0).epsilon(1e-12));

    rng::Xoshiro256pp gen(17);
    const auto m = oracles::random_measure(gen, 5, 2, 1.0, false);
    const double lambda = 1.7;
    std::vector<Point> scaled_pts;
    for (const auto& pt : m.points) {
        Point q = pt;
        for (auto& v : q) v *= lambda;
        scaled_pts.push_back(q);
    }
    const auto scaled = make_measure(scaled_pts, m.weights);
    const double base = bounds::stability_constant(m, m, m, m, 3.0);
    const double grown = bounds::stability_constant(scaled, scaled, scaled, scaled, 3.0);
    CHECK(grown == doctest::Approx(std::pow(lambda, 2.0) * base).epsilon(1e-12));
}

TEST_CASE("stability gap check holds with the calibrated constant") {
    rng::Xoshiro256pp gen(202);
    const auto mu1 = oracles::random_measure(gen, 4, 2, 1.0, true);
    const auto mu2 = oracles::random_measure(gen, 4, 2, 1.0, true);
    CHECK(bounds::stability_gap_check(mu1, mu2, mu1, mu2, power_cost(2.0), 1.0).passed);

    for (int k = 0; k < 40; ++k) {
        const auto a1 = oracles::random_measure(gen, 4, 2, 1.0, true);
        const auto a2 = oracles::random_measure(gen, 4, 2, 1.0, true);
        const auto b1 = oracles::random_measure(gen, 4, 2, 1.0, true);
        const auto b2 = oracles::random_measure(gen, 4, 2, 1.0, true);
        CHECK(bounds::stability_gap_check(a1, a2, b1, b2, power_cost(2.0), 1.0).passed);
    }
}

TEST_CASE("stability gap grows at most linearly under small translations") {
    rng::Xoshiro256pp gen(203);
    const auto mu1 = oracles::random_measure(gen, 4, 2, 1.0, true);
    const auto mu2 = oracles::random_measure(gen, 4, 2, 1.0, true);
    SolverConfig cfg;
    cfg.epsilon = 1.0;
    const double base = eot::solve(mu1, mu2, power_cost(2.0), cfg).value;
    for (double t : {0.01, 0.05, 0.1, 0.25, 0.5}) {
        std::vector<Point> moved;
        for (const auto& pt : mu1.points) moved.push_back({pt[0] + t, pt[1]});
        const auto shifted = make_measure(moved, mu1.weights);
        const double value = eot::solve(shifted, mu2, power_cost(2.0), cfg).value;
        const double level = bounds::stability_constant(mu1, mu2, shifted, mu2, 2.0);
        const double w = transport::quad_wp(mu1, mu2, shifted, mu2, 2.0);
        CHECK(std::abs(value - base) <= 16.0 * level * w + 1e-8);  // p cp 2^p = 16
        CHECK(w <= t + 1e-9);  // translation couples atom to atom
    }
}

TEST_CASE("truncation bound dominates the exact truncation distance") {
    const DiscreteMeasure inside = make_measure({{0.1}, {-0.2}}, {0.5, 0.5});
    CHECK(bounds::truncation_wp_bound(inside, 1.0, 2.0) == 0.0);

    const DiscreteMeasure split = make_measure({{0.0}, {2.0}}, {0.5, 0.5});
    CHECK(bounds::truncation_wp_bound(split, 1.0, 2.0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(transport::exact_wp_p(split, measures::restrict(split, 1.0), 2.0) ==
          doctest::Approx(2.0).epsilon(1e-10));

    rng::Xoshiro256pp gen(404);
    int done = 0;
    while (done < 120) {
        const std::size_t atoms = 2 + gen.next() % 5;
        const auto m = oracles::random_measure(gen, atoms, 2, 2.0, true);
        const double radius = 0.4 + 2.0 * gen.uniform01();
        if (measures::tail_mass(m, radius) == 0.0) continue;
        bool inside_mass = false;
        for (const auto& pt : m.points) inside_mass = inside_mass || norm(pt) < radius;
        if (!inside_mass) continue;
        const double bound = bounds::truncation_wp_bound(m, radius, 2.0);
        const double exact = transport::exact_wp_p(m, measures::restrict(m, radius), 2.0);
        CHECK(bound >= exact - 1e-9);
        ++done;
    }
}

TEST_CASE("truncation bound is nonincreasing past the median radius") {
    rng::Xoshiro256pp gen(405);
    for (int k = 0; k < 20; ++k) {
        const auto m = oracles::random_measure(gen, 8, 2, 2.0, true);
        std::vector<double> radii;
        for (const auto& pt : m.points) radii.push_back(norm(pt));
        std::sort(radii.begin(), radii.end());
        const double start = radii[radii.size() / 2] + 1e-6;  // tail mass <= 1/2 from here
        double prev = 1e300;
        for (double r = start; r < start + 3.0; r += 0.2) {
            const double bound = bounds::truncation_wp_bound(m, r, 2.0);
            CHECK(bound <= prev + 1e-12);
            prev = bound;
        }
    }
}

TEST_CASE("binomial reciprocal sums respect the explicit constant") {
    const double constant = 1.0 / (1.0 - 2.0 * std::sqrt(2.0) / 3.0);

    // a = 1 leaves only the j = n term
    const auto [half1, quarter1] = bounds::binomial_reciprocal_sums(256, 1.0);
    CHECK(half1 == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
    CHECK(quarter1 == doctest::Approx(0.25).epsilon(1e-12));

    // n = 4 at the threshold: direct four-term evaluation
    {
        const std::int64_t n = 4;
        const double a = 1.0 - 2.0 / 16.0;
        double direct_half = 0.0;
        for (int j = 1; j <= 4; ++j) {
            double choose = 1.0;
            for (int t = 0; t < j; ++t) choose = choose * (n - t) / (t + 1);
            direct_half +=
                choose * std::pow(a, j) * std::pow(1.0 - a, n - j) / std::sqrt(double(j));
        }
        const auto [half, quarter] = bounds::binomial_reciprocal_sums(n, a);
        CHECK(half == doctest::Approx(direct_half).epsilon(1e-12));
        CHECK(half * 2.0 <= constant);
        CHECK(quarter * std::sqrt(2.0) <= constant);
    }

    for (std::int64_t n = 4; n <= 1024; n *= 4) {
        const double dn = static_cast<double>(n);
        CHECK(bounds::binomial_sum_check(n, 1.0 - 2.0 / (dn * dn)).passed);
    }
    CHECK_THROWS_AS(bounds::binomial_sum_check(16, 0.5), DomainViolation);
}

TEST_CASE("theorem bound composes moment and covering terms") {
    BoundInputs inputs;
    inputs.profile_mu = make_tail_profile(1.0, 2.0);
    inputs.profile_nu = make_tail_profile(2.0, 1.0);
    inputs.p = 2.0;
    inputs.cp = 2.0;
    inputs.epsilon = 1.0;
    inputs.n = 1024;

    const std::vector<Point> single{{0.0, 0.0}};
    const BoundBreakdown bd = bounds::theorem1_bound(inputs, single, single);
    CHECK(bd.covering_counts.first == 1);
    CHECK(bd.covering_counts.second == 1);
    const double root_n = std::sqrt(1024.0);
    const double moment =
        (1.0 + std::pow(1.0, -1.0) + std::pow(2.0, -2.0)) / root_n;
    CHECK(bd.moment_term == doctest::Approx(moment).epsilon(1e-12));
    const double covering =
        (1.0 + std::pow(bd.r_mu + bd.r_nu, 2.0)) / root_n;
    CHECK(bd.covering_term == doctest::Approx(covering).epsilon(1e-12));
    CHECK(bd.total == doctest::Approx(bd.moment_term + bd.covering_term).epsilon(1e-12));

    // doubling n rescales the moment term by exactly sqrt(1/2)
    BoundInputs doubled = inputs;
    doubled.n = 2048;
    const BoundBreakdown bd2 = bounds::theorem1_bound(doubled, single, single);
    CHECK(bd2.moment_term * std::sqrt(2048.0) ==
          doctest::Approx(bd.moment_term * std::sqrt(1024.0)).epsilon(1e-14));
}

TEST_CASE("theorem bound matches an independent recomputation") {
    rng::Xoshiro256pp gen(2026);
    std::vector<Point> support_mu, support_nu;
    for (int i = 0; i < 64; ++i) {
        support_mu.push_back({gen.gaussian(), gen.gaussian()});
        support_nu.push_back({gen.gaussian(), gen.gaussian()});
    }
    BoundInputs inputs;
    inputs.profile_mu = gaussian_tail_profile(2, 1.0);
    inputs.profile_nu = gaussian_tail_profile(2, 1.0);
    inputs.p = 2.0;
    inputs.cp = 2.0;
    inputs.epsilon = 1.0;
    inputs.n = 1024;
    inputs.c_global = 1.0;
    const BoundBreakdown bd = bounds::theorem1_bound(inputs, support_mu, support_nu);

    // independent arithmetic path
    const double log_n = std::log(1024.0);
    const double r_mu = std::sqrt(4.0 * 2.0 * 2.0 * 2.0 * 1.0 * log_n);
    CHECK(bd.r_mu == doctest::Approx(r_mu).epsilon(1e-12));
    const double reach = bd.r_mu + bd.r_nu;
    const double scale = 1.0 / reach;
    std::vector<Point> in_mu, in_nu;
    for (const auto& pt : support_mu)
        if (norm(pt) < bd.r_mu) in_mu.push_back(pt);
    for (const auto& pt : support_nu)
        if (norm(pt) < bd.r_nu) in_nu.push_back(pt);
    const std::size_t count_mu = covering::greedy_cover(in_mu, scale).count;
    const std::size_t count_nu = covering::greedy_cover(in_nu, scale).count;
    CHECK(count_mu == bd.covering_counts.first);
    CHECK(count_nu == bd.covering_counts.second);
    const double root_n = std::sqrt(1024.0);
    const double total =
        (1.0 + 2.0 * std::pow(1.0 / 2.0, -1.0)) / root_n +
        (1.0 + std::pow(reach, 2.0)) *
            std::sqrt(static_cast<double>(std::min(count_mu, count_nu))) / root_n;
    CHECK(bd.total == doctest::Approx(total).epsilon(1e-9));
}

TEST_CASE("theorem bound is nonincreasing in n") {
    rng::Xoshiro256pp gen(31337);
    std::vector<Point> support_mu, support_nu;
    for (int i = 0; i < 32; ++i) {
        support_mu.push_back(oracles::random_point(gen, 2, 1.5));
        support_nu.push_back(oracles::random_point(gen, 2, 1.5));
    }
    BoundInputs inputs;
    inputs.profile_mu = gaussian_tail_profile(2, 0.8);
    inputs.profile_nu = gaussian_tail_profile(2, 1.1);
    inputs.epsilon = 0.5;
    double prev = 1e300;
    for (std::int64_t n = 4; n <= 65536; n *= 4) {
        inputs.n = n;
        const double total = bounds::theorem1_bound(inputs, support_mu, support_nu).total;
        CHECK(total <= prev + 1e-12);
        prev = total;
    }
}

TEST_CASE("corollary evaluators cover the closed-form family") {
    const TailProfile profile = make_tail_profile(1.0, 1.0);

    // semidiscrete: covering factor sqrt(K)
    const double k1 = bounds::semidiscrete_bound(profile, 1, 0.5, 2.0, 1.0, 256);
    const double k4 = bounds::semidiscrete_bound(profile, 4, 0.5, 2.0, 1.0, 256);
    const double r_mu = bounds::truncation_radius(profile, 2.0, 256);
    const double covering_part = (1.0 + r_mu * r_mu) / 16.0;
    CHECK(k4 - k1 == doctest::Approx(covering_part).epsilon(1e-9));

    // manifold: halving epsilon scales the covering factor by 2^{ d_nu / 2 }
    const double m1 = bounds::manifold_bound(profile, 1.0, 1.0, 1.0, 0.5, 2.0, 1.0, 256);
    const double m2 = bounds::manifold_bound(profile, 1.0, 1.0, 1.0, 0.5, 2.0, 0.5, 256);
    const double base_moment =
        (1.0 + std::pow(profile.c, -2.0) + 0.5) / 16.0;
    const double f1 = (m1 - base_moment) / (1.0 + r_mu * r_mu);
    const double f2 = (m2 - base_moment) / (0.5 + r_mu * r_mu);
    CHECK(f2 / f1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));

    // subgaussian p=2 against direct exponent arithmetic
    const double sg = bounds::subgaussian_p2_bound(1.0, 1, 40.0, 1024, 1.0);
    const double inner = 40.0 + std::log(1024.0) / 40.0;
    CHECK(sg == doctest::Approx(std::pow(inner, 1.5) / 32.0).epsilon(1e-12));

    // nu-compact reduces to the semidiscrete form for finite support
    const DiscreteMeasure nu = make_measure({{0.5}, {-0.25}}, {0.5, 0.5});
    const double nc = bounds::nu_compact_bound(profile, nu, 2.0, 1.0, 256, 1.0);
    CHECK(nc > 0.0);

    const double sgg = bounds::subgaussian_bound(1.0, 2, 2.0, 1.0, 256, 1.0);
    CHECK(sgg > 0.0);
}

TEST_CASE("corollary dispatcher validates parameters") {
    std::map<std::string, double> params{{"sigma", 1.0}, {"d", 2.0}, {"epsilon", 1.0},
                                         {"n", 256.0}};
    CHECK_THROWS_AS(bounds::corollary_bound(CorollaryKind::subgaussian, params),
                    std::invalid_argument);  // p missing
    params["p"] = 2.0;
    CHECK(bounds::corollary_bound(CorollaryKind::subgaussian, params) > 0.0);
    CHECK_THROWS_AS(bounds::corollary_bound(CorollaryKind::nu_compact, params),
                    std::invalid_argument);  // nu measure missing
}

TEST_CASE("bound breakdown serializes every component") {
    BoundInputs inputs;
    inputs.profile_mu = make_tail_profile(1.0, 2.0);
    inputs.profile_nu = make_tail_profile(1.0, 2.0);
    const std::vector<Point> single{{0.0}};
    const auto j = bounds::to_json(bounds::theorem1_bound(inputs, single, single));
    for (const char* key : {"r_mu", "r_nu", "moment_term", "covering_term", "total"})
        CHECK(j.contains(key));
}
