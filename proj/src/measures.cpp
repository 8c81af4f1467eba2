#include "eotlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "eotlab/errors.hpp"
#include "eotlab/rng.hpp"

namespace eotlab {

namespace {

void validate_profile(const TailProfile& p) {
    if (!(p.c > 0.0)) throw std::invalid_argument("TailProfile: c must be positive");
    if (!(p.alpha >= 1.0)) throw std::invalid_argument("TailProfile: alpha must be >= 1");
}

double require_param(const SamplerSpec& spec, const std::string& key) {
    auto it = spec.params.find(key);
    if (it == spec.params.end())
        throw std::invalid_argument("SamplerSpec: missing parameter '" + key + "'");
    return it->second;
}

}  // namespace

TailProfile make_tail_profile(double c, double alpha, TailFamily family, double radius) {
    TailProfile p{c, alpha, family, radius};
    validate_profile(p);
    return p;
}

TailProfile gaussian_tail_profile(std::size_t dim, double sigma) {
    if (dim == 0 || !(sigma > 0.0))
        throw std::invalid_argument("gaussian_tail_profile: need dim >= 1 and sigma > 0");
    return TailProfile{1.0 / (static_cast<double>(dim) * sigma * sigma), 2.0,
                       TailFamily::gaussian, 0.0};
}

TailProfile compact_tail_profile(double radius, double alpha) {
    if (!(radius >= 0.0)) throw std::invalid_argument("compact_tail_profile: radius < 0");
    const double r_eff = std::max(radius, 1e-12);
    return TailProfile{std::log(2.0) / std::pow(r_eff, alpha), alpha, TailFamily::compact,
                       radius};
}

DiscreteMeasure make_measure(std::vector<Point> points, std::vector<double> weights) {
    if (points.empty()) throw std::invalid_argument("DiscreteMeasure: empty support");
    if (points.size() != weights.size())
        throw std::invalid_argument("DiscreteMeasure: points/weights length mismatch");
    const std::size_t dim = points.front().size();
    if (dim == 0) throw std::invalid_argument("DiscreteMeasure: zero-dimensional point");
    for (const auto& pt : points)
        if (pt.size() != dim) throw std::invalid_argument("DiscreteMeasure: mixed dimensions");
    for (double w : weights)
        if (!(w >= 0.0)) throw std::invalid_argument("DiscreteMeasure: negative weight");
    const double total = kahan_sum(weights);
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteMeasure: weights sum to " + format_g17(total));
    return DiscreteMeasure{dim, std::move(points), std::move(weights)};
}

DiscreteMeasure dirac(Point x) {
    std::vector<Point> pts{std::move(x)};
    return make_measure(std::move(pts), {1.0});
}

DiscreteMeasure collapse_duplicates(const DiscreteMeasure& m) {
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return lex_less(m.points[a], m.points[b]);
    });
    std::vector<Point> pts;
    std::vector<double> wts;
    for (std::size_t idx : order) {
        if (!pts.empty() && pts.back() == m.points[idx]) {
            wts.back() += m.weights[idx];
        } else {
            pts.push_back(m.points[idx]);
            wts.push_back(m.weights[idx]);
        }
    }
    return DiscreteMeasure{m.dim, std::move(pts), std::move(wts)};
}

SamplerSpec gaussian_sampler(std::size_t dim, double sigma, std::vector<double> mean) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_sampler: sigma must be positive");
    if (!mean.empty() && mean.size() != dim)
        throw std::invalid_argument("gaussian_sampler: mean dimension mismatch");
    SamplerSpec spec;
    spec.profile = gaussian_tail_profile(dim, sigma);
    spec.dim = dim;
    spec.params["sigma"] = sigma;
    spec.mean = std::move(mean);
    return spec;
}

SamplerSpec exponential_sampler(std::size_t dim, double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential_sampler: rate must be positive");
    SamplerSpec spec;
    spec.profile = make_tail_profile(rate, 1.0, TailFamily::exponential);
    spec.dim = dim;
    spec.params["rate"] = rate;
    return spec;
}

SamplerSpec uniform_ball_sampler(std::size_t dim, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("uniform_ball_sampler: radius must be positive");
    SamplerSpec spec;
    spec.profile = compact_tail_profile(radius);
    spec.dim = dim;
    spec.params["radius"] = radius;
    return spec;
}

SamplerSpec discrete_sampler(DiscreteMeasure atoms) {
    SamplerSpec spec;
    double radius = 0.0;
    for (const auto& pt : atoms.points) radius = std::max(radius, norm(pt));
    spec.profile = compact_tail_profile(radius);
    spec.profile.family = TailFamily::discrete_atoms;
    spec.dim = atoms.dim;
    spec.atoms = std::move(atoms);
    return spec;
}

namespace measures {

namespace {

Point unit_direction(rng::Xoshiro256pp& gen, std::size_t dim) {
    if (dim == 1) return Point{gen.uniform01() < 0.5 ? -1.0 : 1.0};
    while (true) {
        Point v(dim);
        double s = 0.0;
        for (auto& x : v) {
            x = gen.gaussian();
            s += x * x;
        }
        if (s > 1e-300) {
            const double inv = 1.0 / std::sqrt(s);
            for (auto& x : v) x *= inv;
            return v;
        }
    }
}

Point sample_one(const SamplerSpec& spec, rng::Xoshiro256pp& gen) {
    switch (spec.profile.family) {
        case TailFamily::gaussian: {
            const double sigma = require_param(spec, "sigma");
            if (!(sigma > 0.0)) throw std::invalid_argument("sample: sigma must be positive");
            Point x(spec.dim);
            for (std::size_t k = 0; k < spec.dim; ++k) {
                x[k] = sigma * gen.gaussian();
                if (!spec.mean.empty()) x[k] += spec.mean[k];
            }
            return x;
        }
        case TailFamily::exponential: {
            const double rate = require_param(spec, "rate");
            if (!(rate > 0.0)) throw std::invalid_argument("sample: rate must be positive");
            const double radius = -std::log(gen.uniform_open01()) / rate;
            Point x = unit_direction(gen, spec.dim);
            for (auto& v : x) v *= radius;
            return x;
        }
        case TailFamily::compact: {
            const double ball = require_param(spec, "radius");
            if (!(ball > 0.0)) throw std::invalid_argument("sample: radius must be positive");
            const double radius =
                ball * std::pow(gen.uniform01(), 1.0 / static_cast<double>(spec.dim));
            Point x = unit_direction(gen, spec.dim);
            for (auto& v : x) v *= radius;
            return x;
        }
        case TailFamily::discrete_atoms: {
            const DiscreteMeasure& atoms = *spec.atoms;
            const double u = gen.uniform01();
            double acc = 0.0;
            std::size_t pick = atoms.size() - 1;
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                acc += atoms.weights[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
            return atoms.points[pick];
        }
        case TailFamily::custom:
            throw std::invalid_argument("sample: custom tail profiles carry no sampler");
    }
    throw std::invalid_argument("sample: unknown family");
}

}  // namespace

std::vector<Point> sample(const SamplerSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample: n must be >= 1");
    if (spec.dim == 0) throw std::invalid_argument("sample: dim must be >= 1");
    if (spec.profile.family == TailFamily::discrete_atoms && !spec.atoms)
        throw std::invalid_argument("sample: discrete_atoms spec without ground truth atoms");
    rng::Xoshiro256pp gen(seed);
    std::vector<Point> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(spec, gen));
    return out;
}

DiscreteMeasure empirical(std::span<const Point> pts) {
    if (pts.empty()) throw std::invalid_argument("empirical: no points");
    const double w = 1.0 / static_cast<double>(pts.size());
    std::vector<Point> points(pts.begin(), pts.end());
    std::vector<double> weights(pts.size(), w);
    return make_measure(std::move(points), std::move(weights));
}

DiscreteMeasure restrict(const DiscreteMeasure& m, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("restrict: radius must be positive");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (norm(m.points[i]) < radius) keep.push_back(i);
    if (keep.empty())
        throw NoMassInBall("restrict: no atom inside ball of radius " + format_g17(radius));
    if (keep.size() == m.size()) return m;  // nothing dropped, bitwise identity
    std::vector<Point> pts;
    std::vector<double> wts;
    pts.reserve(keep.size());
    wts.reserve(keep.size());
    for (std::size_t i : keep) {
        pts.push_back(m.points[i]);
        wts.push_back(m.weights[i]);
    }
    const double total = kahan_sum(wts);
    if (!(total > 0.0)) throw NoMassInBall("restrict: zero mass inside ball");
    for (auto& w : wts) w /= total;
    return DiscreteMeasure{m.dim, std::move(pts), std::move(wts)};
}

DiscreteMeasure restrict_complement(const DiscreteMeasure& m, double radius) {
    if (!(radius > 0.0))
        throw std::invalid_argument("restrict_complement: radius must be positive");
    std::vector<Point> pts;
    std::vector<double> wts;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (norm(m.points[i]) >= radius) {
            pts.push_back(m.points[i]);
            wts.push_back(m.weights[i]);
        }
    }
    if (pts.empty())
        throw NoMassInBall("restrict_complement: no atom outside radius " + format_g17(radius));
    const double total = kahan_sum(wts);
    if (!(total > 0.0)) throw NoMassInBall("restrict_complement: zero tail mass");
    for (auto& w : wts) w /= total;
    return DiscreteMeasure{m.dim, std::move(pts), std::move(wts)};
}

double moment(const DiscreteMeasure& m, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("moment: p must be >= 1");
    std::vector<double> terms(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        terms[i] = m.weights[i] * std::pow(norm(m.points[i]), p);
    return std::pow(kahan_sum(terms), 1.0 / p);
}

double tail_mass(const DiscreteMeasure& m, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("tail_mass: r must be positive");
    std::vector<double> terms;
    terms.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        if (norm(m.points[i]) >= r) terms.push_back(m.weights[i]);
    return terms.empty() ? 0.0 : kahan_sum(terms);
}

nlohmann::json to_json(const DiscreteMeasure& m) {
    return nlohmann::json{{"dim", m.dim}, {"points", m.points}, {"weights", m.weights}};
}

DiscreteMeasure measure_from_json(const nlohmann::json& j) {
    return make_measure(j.at("points").get<std::vector<Point>>(),
                        j.at("weights").get<std::vector<double>>());
}

void save_csv(const DiscreteMeasure& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open " + path);
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (double v : m.points[i]) out << format_g17(v) << ',';
        out << format_g17(m.weights[i]) << '\n';
    }
    if (!out) throw std::runtime_error("save_csv: write failed for " + path);
}

DiscreteMeasure load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);
    std::vector<Point> pts;
    std::vector<double> wts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> fields;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) fields.push_back(std::stod(cell));
        if (fields.size() < 2)
            throw std::runtime_error("load_csv: malformed row in " + path);
        wts.push_back(fields.back());
        fields.pop_back();
        pts.push_back(std::move(fields));
    }
    return make_measure(std::move(pts), std::move(wts));
}

namespace {

const std::map<std::string, TailFamily> kFamilyNames = {
    {"gaussian", TailFamily::gaussian},     {"exponential", TailFamily::exponential},
    {"compact", TailFamily::compact},       {"discrete_atoms", TailFamily::discrete_atoms},
    {"custom", TailFamily::custom}};

std::string family_name(TailFamily f) {
    for (const auto& [name, fam] : kFamilyNames)
        if (fam == f) return name;
    return "custom";
}

}  // namespace

nlohmann::json profile_to_json(const TailProfile& profile) {
    return nlohmann::json{{"c", profile.c},
                          {"alpha", profile.alpha},
                          {"family", family_name(profile.family)},
                          {"radius", profile.radius}};
}

TailProfile profile_from_json(const nlohmann::json& j) {
    const auto it = kFamilyNames.find(j.at("family").get<std::string>());
    if (it == kFamilyNames.end())
        throw std::invalid_argument("profile_from_json: unknown family");
    return make_tail_profile(j.at("c").get<double>(), j.at("alpha").get<double>(), it->second,
                             j.value("radius", 0.0));
}

nlohmann::json sampler_to_json(const SamplerSpec& spec) {
    nlohmann::json j{{"profile", profile_to_json(spec.profile)},
                     {"dim", spec.dim},
                     {"params", spec.params}};
    if (!spec.mean.empty()) j["mean"] = spec.mean;
    if (spec.atoms) j["atoms"] = to_json(*spec.atoms);
    return j;
}

SamplerSpec sampler_from_json(const nlohmann::json& j) {
    SamplerSpec spec;
    spec.profile = profile_from_json(j.at("profile"));
    spec.dim = j.at("dim").get<std::size_t>();
    if (j.contains("params")) spec.params = j.at("params").get<std::map<std::string, double>>();
    if (j.contains("mean")) spec.mean = j.at("mean").get<std::vector<double>>();
    if (j.contains("atoms")) spec.atoms = measure_from_json(j.at("atoms"));
    return spec;
}

}  // namespace measures
}  // namespace eotlab
