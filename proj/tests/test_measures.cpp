#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "eotlab/errors.hpp"
#include "eotlab/measures.hpp"
#include "eotlab/rng.hpp"
#include "oracles.hpp"

using namespace eotlab;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("single atom sampler is constant") {
    const SamplerSpec spec = discrete_sampler(dirac({0.0}));
    const auto pts = measures::sample(spec, 3, 99);
    REQUIRE(pts.size() == 3);
    for (const auto& pt : pts) CHECK(pt == Point{0.0});
}

TEST_CASE("gaussian sample mean obeys the CLT window") {
    const auto pts = measures::sample(gaussian_sampler(1, 1.0), 100000, 20240601);
    double mean = 0.0;
    for (const auto& pt : pts) mean += pt[0];
    mean /= static_cast<double>(pts.size());
    CHECK(std::abs(mean) < 3.0 / std::sqrt(1e5));  // 3 sigma / sqrt(n)
    CHECK(std::abs(mean) < 0.02);
}

TEST_CASE("empirical tails stay under the envelope plus DKW slack") {
    // Radial exponential: the envelope holds exactly, so Monte Carlo noise is
    // the only slack needed.
    const SamplerSpec exp_spec = exponential_sampler(2, 1.5);
    auto pts = measures::sample(exp_spec, 100000, 7);
    DiscreteMeasure emp = measures::empirical(pts);
    for (double r = 0.5; r < 8.0; r += 0.5) {
        const double envelope =
            2.0 * std::exp(-exp_spec.profile.c * std::pow(r, exp_spec.profile.alpha));
        CHECK(measures::tail_mass(emp, r) <= envelope + 0.01);
    }

    const SamplerSpec gauss = gaussian_sampler(3, 0.8);
    pts = measures::sample(gauss, 10000, 11);
    emp = measures::empirical(pts);
    const double r = 3.0 * 0.8 * std::sqrt(3.0);
    const double envelope =
        2.0 * std::exp(-gauss.profile.c * std::pow(r, gauss.profile.alpha));
    CHECK(measures::tail_mass(emp, r) <= envelope + 0.01);
}

TEST_CASE("sampling is deterministic in (spec, n, seed)") {
    const SamplerSpec spec = gaussian_sampler(2, 0.7);
    const auto a = measures::sample(spec, 257, 123456);
    const auto b = measures::sample(spec, 257, 123456);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i][0] == b[i][0]);
        CHECK(a[i][1] == b[i][1]);
    }
    const auto c = measures::sample(spec, 257, 123457);
    CHECK(a[0] != c[0]);
}

TEST_CASE("sampler rejects bad input") {
    CHECK_THROWS_AS(gaussian_sampler(2, -1.0), std::invalid_argument);
    SamplerSpec spec = gaussian_sampler(2, 1.0);
    spec.params["sigma"] = 0.0;
    CHECK_THROWS_AS(measures::sample(spec, 4, 1), std::invalid_argument);
    SamplerSpec custom;
    custom.profile = make_tail_profile(1.0, 1.0, TailFamily::custom);
    custom.dim = 1;
    CHECK_THROWS_AS(measures::sample(custom, 4, 1), std::invalid_argument);
}

TEST_CASE("empirical puts weight 1/n on every draw") {
    const std::vector<Point> two = {{0.0}, {0.0}};
    const DiscreteMeasure m2 = measures::empirical(two);
    REQUIRE(m2.size() == 2);
    CHECK(m2.weights[0] == 0.5);
    CHECK(m2.weights[1] == 0.5);

    const std::vector<Point> three = {{1.0}, {2.0}, {3.0}};
    const DiscreteMeasure m3 = measures::empirical(three);
    for (double w : m3.weights) CHECK(w == doctest::Approx(1.0 / 3).epsilon(1e-15));

    const auto pts = measures::sample(gaussian_sampler(1, 1.0), 7, 5);
    const DiscreteMeasure m7 = measures::empirical(pts);
    CHECK(std::abs(kahan_sum(m7.weights) - 1.0) <= 1e-12);

    CHECK_THROWS_AS(measures::empirical(std::vector<Point>{}), std::invalid_argument);
}

TEST_CASE("restrict keeps the open ball and renormalizes") {
    const DiscreteMeasure m = make_measure({{0.0}, {5.0}}, {0.5, 0.5});
    const DiscreteMeasure r = measures::restrict(m, 1.0);
    REQUIRE(r.size() == 1);
    CHECK(r.points[0] == Point{0.0});
    CHECK(r.weights[0] == 1.0);

    const DiscreteMeasure u = make_measure({{0.0}, {1.0}, {2.0}},
                                           {1.0 / 3, 1.0 / 3, 1.0 / 3});
    const DiscreteMeasure ru = measures::restrict(u, 1.5);
    REQUIRE(ru.size() == 2);
    CHECK(ru.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ru.weights[1] == doctest::Approx(0.5).epsilon(1e-15));

    const DiscreteMeasure far = make_measure({{3.0}, {4.0}}, {0.5, 0.5});
    CHECK_THROWS_AS(measures::restrict(far, 1.0), NoMassInBall);
}

TEST_CASE("restrict is idempotent atom for atom") {
    rng::Xoshiro256pp gen(31);
    for (int k = 0; k < 30; ++k) {
        const auto m = oracles::random_measure(gen, 3 + gen.next() % 12, 2, 2.0, k % 2 == 0);
        const double radius = 0.5 + 2.0 * gen.uniform01();
        bool inside = false;
        for (const auto& pt : m.points) inside = inside || norm(pt) < radius;
        if (!inside) continue;
        const DiscreteMeasure once = measures::restrict(m, radius);
        const DiscreteMeasure twice = measures::restrict(once, radius);
        REQUIRE(once.size() == twice.size());
        for (std::size_t i = 0; i < once.size(); ++i) {
            CHECK(once.points[i] == twice.points[i]);
            CHECK(once.weights[i] == twice.weights[i]);  // bitwise
        }
    }
}

TEST_CASE("moments match direct sums and shrink under restriction") {
    CHECK(measures::moment(dirac({0.0, 0.0}), 2.0) == 0.0);
    const DiscreteMeasure pm = make_measure({{-1.0}, {1.0}}, {0.5, 0.5});
    CHECK(measures::moment(pm, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    const DiscreteMeasure four =
        make_measure({{0.0}, {1.0}, {2.0}, {3.0}}, {0.25, 0.25, 0.25, 0.25});
    CHECK(measures::moment(four, 3.0) ==
          doctest::Approx(std::pow(36.0 / 4.0, 1.0 / 3.0)).epsilon(1e-14));

    rng::Xoshiro256pp gen(77);
    for (int k = 0; k < 40; ++k) {
        const auto m = oracles::random_measure(gen, 4 + gen.next() % 10, 3, 2.0, k % 2 == 0);
        const double radius = 0.5 + 2.5 * gen.uniform01();
        bool inside = false;
        for (const auto& pt : m.points) inside = inside || norm(pt) < radius;
        if (!inside) continue;
        const auto rm = measures::restrict(m, radius);
        for (double p : {1.0, 2.0, 3.0, 4.0})
            CHECK(measures::moment(rm, p) <= measures::moment(m, p) + 1e-12);
    }
}

TEST_CASE("tail mass counts the closed complement") {
    CHECK(measures::tail_mass(dirac({0.0}), 1.0) == 0.0);
    const DiscreteMeasure m = make_measure({{0.0}, {2.0}}, {0.5, 0.5});
    CHECK(measures::tail_mass(m, 1.0) == 0.5);
    // boundary atom |x| == r belongs to the tail
    CHECK(measures::tail_mass(m, 2.0) == 0.5);

    rng::Xoshiro256pp gen(13);
    for (int k = 0; k < 20; ++k) {
        const auto rm = oracles::random_measure(gen, 5 + gen.next() % 10, 2, 2.0, false);
        double prev = 1.0;
        for (double r = 0.25; r < 4.0; r += 0.25) {
            const double tail = measures::tail_mass(rm, r);
            CHECK(tail <= prev + 1e-15);
            prev = tail;
            double in_ball = 0.0;
            for (std::size_t i = 0; i < rm.size(); ++i)
                if (norm(rm.points[i]) < r) in_ball += rm.weights[i];
            CHECK(std::abs(tail + in_ball - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("gaussian profiles are auto-filled") {
    const TailProfile p = gaussian_tail_profile(4, 0.5);
    CHECK(p.alpha == 2.0);
    CHECK(p.c == doctest::Approx(1.0 / (4 * 0.25)).epsilon(1e-15));
    CHECK(p.family == TailFamily::gaussian);
}

TEST_CASE("measure construction validates invariants") {
    CHECK_THROWS_AS(make_measure({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(make_measure({{0.0}}, {0.5}), std::invalid_argument);
    CHECK_THROWS_AS(make_measure({{0.0}, {1.0}}, {1.5, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(make_measure({{0.0}, {1.0, 2.0}}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("collapse_duplicates preserves total mass and distinct atoms") {
    const DiscreteMeasure m =
        make_measure({{1.0}, {0.0}, {1.0}, {0.0}, {2.0}}, {0.2, 0.2, 0.2, 0.2, 0.2});
    const DiscreteMeasure c = collapse_duplicates(m);
    REQUIRE(c.size() == 3);
    CHECK(std::abs(kahan_sum(c.weights) - 1.0) <= 1e-12);
    CHECK(c.points[0] == Point{0.0});
    CHECK(c.weights[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("csv and json round trips are bit exact") {
    rng::Xoshiro256pp gen(1001);
    const auto m = oracles::random_measure(gen, 17, 3, 5.0, false);

    const std::string csv = temp_path("eotlab_measure_roundtrip.csv");
    measures::save_csv(m, csv);
    const DiscreteMeasure mc = measures::load_csv(csv);
    REQUIRE(mc.size() == m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(mc.points[i] == m.points[i]);
        CHECK(mc.weights[i] == m.weights[i]);
    }

    const nlohmann::json j = measures::to_json(m);
    const DiscreteMeasure mj = measures::measure_from_json(nlohmann::json::parse(j.dump()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(mj.points[i] == m.points[i]);
        CHECK(mj.weights[i] == m.weights[i]);
    }
    std::filesystem::remove(csv);
}

TEST_CASE("sampler spec round trips through json") {
    SamplerSpec spec = discrete_sampler(make_measure({{0.5, 0.25}, {1.0, -1.0}}, {0.25, 0.75}));
    const nlohmann::json j = measures::sampler_to_json(spec);
    const SamplerSpec back = measures::sampler_from_json(j);
    CHECK(back.dim == spec.dim);
    CHECK(back.profile.c == spec.profile.c);
    CHECK(back.profile.alpha == spec.profile.alpha);
    REQUIRE(back.atoms.has_value());
    CHECK(back.atoms->points == spec.atoms->points);
    CHECK(back.atoms->weights == spec.atoms->weights);
}
