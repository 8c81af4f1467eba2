#include "eotlab/costs.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace eotlab {

namespace {

void validate(const CostSpec& spec) {
    if (!(spec.p >= 2.0)) throw std::invalid_argument("CostSpec: p must be >= 2");
    if (!(spec.cp > 0.0)) throw std::invalid_argument("CostSpec: cp must be positive");
    if (spec.kind == CostKind::custom && !spec.profile)
        throw std::invalid_argument("CostSpec: custom cost without a profile");
}

}  // namespace

CostSpec power_cost(double p) { return power_cost(p, p); }

CostSpec power_cost(double p, double cp) {
    CostSpec spec{CostKind::power_p, p, cp, nullptr};
    validate(spec);
    return spec;
}

CostSpec custom_cost(std::function<double(double)> h, double p, double cp) {
    CostSpec spec{CostKind::custom, p, cp, std::move(h)};
    validate(spec);
    return spec;
}

namespace costs {

double eval_profile(const CostSpec& spec, double t) {
    if (spec.kind == CostKind::power_p) return std::pow(t, spec.p);
    return spec.profile(t);
}

double eval_cost(const CostSpec& spec, const Point& x, const Point& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("eval_cost: dimension mismatch");
    return eval_profile(spec, distance(x, y));
}

CheckReport check_envelope(const CostSpec& spec,
                           std::span<const std::pair<double, double>> grid) {
    CheckReport report;
    report.name = "cost_envelope";
    for (const auto& [t, tp] : grid) {
        if (!(t > 0.0) || !(tp > 0.0))
            throw std::invalid_argument("check_envelope: grid entries must be positive");
        const double lhs = std::abs(eval_profile(spec, t) - eval_profile(spec, tp));
        const double rhs =
            spec.cp * std::pow(std::max(t, tp), spec.p - 1.0) * std::abs(t - tp);
        report.note(lhs - rhs, "envelope violated at (t,t')=(" + format_g17(t) + "," +
                                   format_g17(tp) + ")");
    }
    return report;
}

CheckReport pointwise_bound_check(const CostSpec& spec,
                                  std::span<const std::pair<Point, Point>> pairs) {
    CheckReport report;
    report.name = "cost_pointwise_bound";
    for (const auto& [x, y] : pairs) {
        const double lhs = std::abs(eval_cost(spec, x, y));
        const double rhs = spec.cp * std::pow(distance(x, y), spec.p);
        report.note(lhs - rhs, "pointwise bound violated at distance " +
                                   format_g17(distance(x, y)));
    }
    return report;
}

nlohmann::json to_json(const CostSpec& spec) {
    if (spec.kind == CostKind::custom)
        throw std::invalid_argument("CostSpec: custom profiles are not serializable");
    return nlohmann::json{{"kind", "power_p"}, {"p", spec.p}, {"C_p", spec.cp}};
}

CostSpec cost_from_json(const nlohmann::json& j) {
    if (j.at("kind").get<std::string>() != "power_p")
        throw std::invalid_argument("cost_from_json: only power_p costs deserialize");
    return power_cost(j.at("p").get<double>(), j.at("C_p").get<double>());
}

}  // namespace costs
}  // namespace eotlab
