#include "eotlab/covering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace eotlab::covering {

namespace {

constexpr std::size_t kExactLimit = 16;

std::size_t lex_smallest_index(std::span<const Point> points) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (lex_less(points[i], points[best])) best = i;
    return best;
}

// Exact minimum over data-point centers, found by subset search over
// coverage bitmasks in increasing cardinality.
std::vector<std::size_t> exact_cover(std::span<const Point> points, double delta) {
    const std::size_t n = points.size();
    const std::uint32_t full = (1u << n) - 1u;
    std::vector<std::uint32_t> covers(n, 0);
    const double d2 = delta * delta;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (squared_distance(points[i], points[j]) <= d2)
                covers[i] |= (1u << j);

    std::vector<std::size_t> chosen;
    std::vector<std::size_t> best;
    // Branch on the lowest uncovered point: one of its covering centers must
    // be chosen, which keeps the tree narrow.
    auto search = [&](auto&& self, std::uint32_t covered, std::size_t budget) -> bool {
        if (covered == full) {
            best = chosen;
            return true;
        }
        if (budget == 0) return false;
        std::size_t pivot = 0;
        while (covered & (1u << pivot)) ++pivot;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(covers[i] & (1u << pivot))) continue;
            chosen.push_back(i);
            if (self(self, covered | covers[i], budget - 1)) return true;
            chosen.pop_back();
        }
        return false;
    };
    for (std::size_t k = 1; k <= n; ++k) {
        chosen.clear();
        if (search(search, 0, k)) break;
    }
    return best;
}

std::vector<std::size_t> farthest_point_cover(std::span<const Point> points, double delta) {
    const std::size_t n = points.size();
    std::vector<std::size_t> centers{lex_smallest_index(points)};
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i)
        nearest[i] = distance(points[i], points[centers[0]]);
    while (true) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (nearest[i] > nearest[far]) far = i;
        if (nearest[far] <= delta) break;
        centers.push_back(far);
        for (std::size_t i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i], distance(points[i], points[far]));
    }
    return centers;
}

}  // namespace

CoverResult greedy_cover(std::span<const Point> points, double delta) {
    if (points.empty()) throw std::invalid_argument("greedy_cover: no points");
    if (!(delta > 0.0)) throw std::invalid_argument("greedy_cover: delta must be positive");
    const std::vector<std::size_t> centers = points.size() <= kExactLimit
                                                 ? exact_cover(points, delta)
                                                 : farthest_point_cover(points, delta);
    CoverResult result;
    result.delta = delta;
    result.count = centers.size();
    result.centers.reserve(centers.size());
    for (std::size_t i : centers) result.centers.push_back(points[i]);
    return result;
}

BallCoverBound ball_cover_bound(double r, double delta, std::size_t d) {
    if (!(r > 0.0) || !(delta > 0.0) || d == 0)
        throw std::invalid_argument("ball_cover_bound: need r, delta > 0 and d >= 1");
    const double log_value = static_cast<double>(d) * std::log1p(2.0 * r / delta);
    if (log_value > std::log(std::numeric_limits<double>::max()))
        return {std::numeric_limits<double>::infinity(), true};
    return {std::exp(log_value), false};
}

namespace {

double ball_mass_naive(const DiscreteMeasure& m, const Point& z, double d2) {
    double mass = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (squared_distance(m.points[i], z) <= d2) mass += m.weights[i];
    return mass;
}

}  // namespace

double inverse_mass_integral(const DiscreteMeasure& m, double delta) {
    if (!(delta > 0.0))
        throw std::invalid_argument("inverse_mass_integral: delta must be positive");
    const double d2 = delta * delta;
    std::vector<double> terms(m.size(), 0.0);

    if (m.size() <= 10000) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m.weights[i] <= 0.0) continue;
            terms[i] = m.weights[i] / ball_mass_naive(m, m.points[i], d2);
        }
        return kahan_sum(terms);
    }

    // Grid hash with cell edge delta; candidates live in the 3^d neighborhood.
    using Cell = std::vector<long long>;
    std::map<Cell, std::vector<std::size_t>> grid;
    auto cell_of = [&](const Point& p) {
        Cell c(p.size());
        for (std::size_t k = 0; k < p.size(); ++k)
            c[k] = static_cast<long long>(std::floor(p[k] / delta));
        return c;
    };
    for (std::size_t i = 0; i < m.size(); ++i) grid[cell_of(m.points[i])].push_back(i);

    const std::size_t dim = m.dim;
    std::vector<long long> offset(dim, -1);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.weights[i] <= 0.0) continue;
        const Cell base = cell_of(m.points[i]);
        double mass = 0.0;
        std::fill(offset.begin(), offset.end(), -1);
        while (true) {
            Cell probe(dim);
            for (std::size_t k = 0; k < dim; ++k) probe[k] = base[k] + offset[k];
            if (auto it = grid.find(probe); it != grid.end())
                for (std::size_t j : it->second)
                    if (squared_distance(m.points[i], m.points[j]) <= d2)
                        mass += m.weights[j];
            std::size_t k = 0;
            while (k < dim && offset[k] == 1) offset[k++] = -1;
            if (k == dim) break;
            ++offset[k];
        }
        terms[i] = m.weights[i] / mass;
    }
    return kahan_sum(terms);
}

double density_norm_bound(const DiscreteMeasure& mu_r, const DiscreteMeasure& nu_s, double r,
                          double s, const CostSpec& cost, double epsilon) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("density_norm_bound: epsilon must be positive");
    for (const auto& pt : mu_r.points)
        if (norm(pt) > r + 1e-12)
            throw std::invalid_argument("density_norm_bound: mu not supported in B_r");
    for (const auto& pt : nu_s.points)
        if (norm(pt) > s + 1e-12)
            throw std::invalid_argument("density_norm_bound: nu not supported in B_s");
    const double scale = epsilon / std::pow(r + s, cost.p - 1.0);
    const std::size_t count_mu = greedy_cover(mu_r.points, scale).count;
    const std::size_t count_nu = greedy_cover(nu_s.points, scale).count;
    return std::exp(8.0 * cost.cp) * static_cast<double>(std::min(count_mu, count_nu));
}

nlohmann::json to_json(const CoverResult& cover) {
    return nlohmann::json{
        {"delta", cover.delta}, {"count", cover.count}, {"centers", cover.centers}};
}

}  // namespace eotlab::covering
