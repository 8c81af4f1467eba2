#pragma once

#include <functional>
#include <span>
#include <utility>

#include <json.hpp>

#include "eotlab/check_report.hpp"
#include "eotlab/common.hpp"

namespace eotlab {

enum class CostKind { power_p, custom };

// Radial cost c(x,y) = h(|x-y|) with h(0) = 0, h >= 0 continuous, together
// with the local Lipschitz envelope |h(t)-h(t')| <= cp (t v t')^{p-1} |t-t'|.
// For power_p the profile is h(t) = t^p and cp defaults to the sharp value p.
struct CostSpec {
    CostKind kind = CostKind::power_p;
    double p = 2.0;
    double cp = 2.0;
    std::function<double(double)> profile;  // custom only
};

CostSpec power_cost(double p);
CostSpec power_cost(double p, double cp);
CostSpec custom_cost(std::function<double(double)> h, double p, double cp);

namespace costs {

double eval_profile(const CostSpec& spec, double t);
double eval_cost(const CostSpec& spec, const Point& x, const Point& y);

// Sweeps |h(t)-h(t')| <= cp (t v t')^{p-1} |t-t'| over the given pairs.
CheckReport check_envelope(const CostSpec& spec,
                           std::span<const std::pair<double, double>> grid);

// Sweeps c(x,y) <= cp |x-y|^p over the given point pairs.
CheckReport pointwise_bound_check(const CostSpec& spec,
                                  std::span<const std::pair<Point, Point>> pairs);

nlohmann::json to_json(const CostSpec& spec);
CostSpec cost_from_json(const nlohmann::json& j);

}  // namespace costs
}  // namespace eotlab
