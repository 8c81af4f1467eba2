#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "eotlab/common.hpp"
#include "eotlab/costs.hpp"
#include "eotlab/measures.hpp"

namespace eotlab {

// A set of data-point centers whose closed delta-balls cover the input.
struct CoverResult {
    std::size_t count = 0;
    std::vector<Point> centers;
    double delta = 0.0;
};

struct BallCoverBound {
    double value = 0.0;
    bool overflow = false;
};

namespace covering {

// Covering count with input points as centers and closed balls (a center
// always covers itself). Small inputs (<= 16 points) are solved exactly by
// subset search; larger inputs fall back to farthest-point traversal started
// from the lexicographically smallest point. Either way the count is at
// least the free-center covering number at scale delta and at most the one
// at scale delta/2.
CoverResult greedy_cover(std::span<const Point> points, double delta);

// (1 + 2r/delta)^d, the Euclidean-ball covering envelope.
BallCoverBound ball_cover_bound(double r, double delta, std::size_t d);

// sum_z w_z / m(closed ball of radius delta at z); at most the covering
// number of the support at scale delta/4. Uses a grid hash above 1e4 atoms.
double inverse_mass_integral(const DiscreteMeasure& m, double delta);

// exp(8 cp) times the smaller covering count of the two supports at scale
// epsilon/(r+s)^{p-1}; an upper bound for the squared L2(mu x nu) norm of
// the entropic density when the marginals live in B_r and B_s.
double density_norm_bound(const DiscreteMeasure& mu_r, const DiscreteMeasure& nu_s, double r,
                          double s, const CostSpec& cost, double epsilon);

nlohmann::json to_json(const CoverResult& cover);

}  // namespace covering
}  // namespace eotlab
