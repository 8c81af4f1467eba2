#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eotlab/common.hpp"

namespace eotlab {

enum class TailFamily { gaussian, exponential, compact, discrete_atoms, custom };

// Exponential tail envelope: mass outside the ball of radius r is at most
// 2 exp(-c r^alpha). For compact families the tail past `radius` is exactly 0.
struct TailProfile {
    double c = 1.0;
    double alpha = 2.0;
    TailFamily family = TailFamily::custom;
    double radius = 0.0;  // support radius, compact/discrete_atoms only
};

TailProfile make_tail_profile(double c, double alpha,
                              TailFamily family = TailFamily::custom, double radius = 0.0);
// Isotropic gaussian with scale sigma: c = 1/(d sigma^2), alpha = 2.
TailProfile gaussian_tail_profile(std::size_t dim, double sigma);
// Any measure supported in the closed ball of the given radius satisfies the
// envelope with c = log(2)/radius^alpha; that c is the largest valid choice.
TailProfile compact_tail_profile(double radius, double alpha = 2.0);

// Weighted point cloud in R^d. Immutable after construction; weights are
// nonnegative and sum to 1 within 1e-12.
struct DiscreteMeasure {
    std::size_t dim = 0;
    std::vector<Point> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
};

DiscreteMeasure make_measure(std::vector<Point> points, std::vector<double> weights);
DiscreteMeasure dirac(Point x);
// Merges bit-identical atoms, summing their weights. The represented measure
// (and hence any transport value against it) is unchanged.
DiscreteMeasure collapse_duplicates(const DiscreteMeasure& m);

// Description of a population measure we can draw i.i.d. samples from.
struct SamplerSpec {
    TailProfile profile;
    std::size_t dim = 1;
    std::map<std::string, double> params;  // family-specific scalars
    std::vector<double> mean;              // gaussian offset; empty = origin
    std::optional<DiscreteMeasure> atoms;  // ground truth for discrete_atoms
};

SamplerSpec gaussian_sampler(std::size_t dim, double sigma, std::vector<double> mean = {});
// Radial subexponential: |X| ~ Exp(rate), direction uniform on the sphere.
SamplerSpec exponential_sampler(std::size_t dim, double rate);
SamplerSpec uniform_ball_sampler(std::size_t dim, double radius);
SamplerSpec discrete_sampler(DiscreteMeasure atoms);

namespace measures {

// Deterministic in (spec, n, seed); bit-identical sequences on repeat calls.
std::vector<Point> sample(const SamplerSpec& spec, std::size_t n, std::uint64_t seed);

// Uniform weights 1/n; duplicate points kept as separate atoms.
DiscreteMeasure empirical(std::span<const Point> pts);

// Conditional measure given the open ball {|x| < radius}: atoms outside are
// dropped and the survivors renormalized. Throws NoMassInBall if none remain.
// Boundary atoms |x| == radius belong to the tail.
DiscreteMeasure restrict(const DiscreteMeasure& m, double radius);
// Conditional measure on the complement {|x| >= radius}.
DiscreteMeasure restrict_complement(const DiscreteMeasure& m, double radius);

// M_p(m) = (sum_i w_i |x_i|^p)^{1/p}, p >= 1.
double moment(const DiscreteMeasure& m, double p);

// Total weight of atoms with |x| >= r.
double tail_mass(const DiscreteMeasure& m, double r);

nlohmann::json to_json(const DiscreteMeasure& m);
DiscreteMeasure measure_from_json(const nlohmann::json& j);

// CSV layout: one row per atom, d coordinate columns then the weight.
void save_csv(const DiscreteMeasure& m, const std::string& path);
DiscreteMeasure load_csv(const std::string& path);

nlohmann::json profile_to_json(const TailProfile& profile);
TailProfile profile_from_json(const nlohmann::json& j);
nlohmann::json sampler_to_json(const SamplerSpec& spec);
SamplerSpec sampler_from_json(const nlohmann::json& j);

}  // namespace measures
}  // namespace eotlab
