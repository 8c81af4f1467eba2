#include "eotlab/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "eotlab/covering.hpp"
#include "eotlab/errors.hpp"
#include "eotlab/transport.hpp"

namespace eotlab::bounds {

namespace {

constexpr int kGammaMaxIter = 500;
constexpr double kGammaEps = 1e-16;

// Regularized lower series, P(s,x), x < s+1.
double gamma_series_p(double s, double x) {
    double ap = s;
    double sum = 1.0 / s;
    double term = sum;
    for (int k = 0; k < kGammaMaxIter; ++k) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kGammaEps)
            return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
    throw std::runtime_error("incomplete_gamma: series did not converge");
}

// Regularized upper continued fraction, Q(s,x), x >= s+1 (modified Lentz).
double gamma_cf_q(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int k = 1; k <= kGammaMaxIter; ++k) {
        const double an = -static_cast<double>(k) * (static_cast<double>(k) - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kGammaEps)
            return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
    throw std::runtime_error("incomplete_gamma: continued fraction did not converge");
}

double sqrt_n(std::int64_t n) { return std::sqrt(static_cast<double>(n)); }

void validate_inputs(const BoundInputs& in) {
    if (in.n < 4) throw std::invalid_argument("BoundInputs: n must be >= 4");
    if (!(in.epsilon > 0.0)) throw std::invalid_argument("BoundInputs: epsilon must be positive");
    if (!(in.p >= 2.0)) throw std::invalid_argument("BoundInputs: p must be >= 2");
    if (!(in.c_global > 0.0))
        throw std::invalid_argument("BoundInputs: c_global must be positive");
}

double require(const std::map<std::string, double>& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end())
        throw std::invalid_argument("corollary_bound: missing parameter '" + key + "'");
    return it->second;
}

}  // namespace

double truncation_radius(const TailProfile& profile, double p, std::int64_t n) {
    if (n < 4) throw std::invalid_argument("truncation_radius: n must be >= 4");
    if (!(p >= 1.0)) throw std::invalid_argument("truncation_radius: p must be >= 1");
    const double inv_c = 1.0 / profile.c;
    const double ratio = std::max(p / profile.alpha, 1.0);
    const double inner = 4.0 * p * inv_c * std::max(inv_c, 1.0) * ratio * ratio *
                         std::log(static_cast<double>(n));
    return std::pow(inner, 1.0 / profile.alpha);
}

double incomplete_gamma(double s, double x) {
    if (!(s > 0.0)) throw std::invalid_argument("incomplete_gamma: s must be positive");
    if (!(x >= 0.0)) throw std::invalid_argument("incomplete_gamma: x must be nonnegative");
    if (s == 1.0) return std::exp(-x);  // sharp identity, used by the tail check
    if (x == 0.0) return std::tgamma(s);
    const double q = x < s + 1.0 ? 1.0 - gamma_series_p(s, x) : gamma_cf_q(s, x);
    return q * std::exp(std::lgamma(s));
}

CheckReport gamma_tail_check(double s, double x) {
    if (!(s > 0.0)) throw std::invalid_argument("gamma_tail_check: s must be positive");
    const double threshold = std::max(4.0 * s * s, std::exp(1.0));
    if (x < threshold)
        throw DomainViolation("gamma_tail_check: x below 4 s^2 v e");
    CheckReport report;
    report.name = "gamma_tail";
    const double lhs = incomplete_gamma(s, std::max(s, 1.0) * std::log(x));
    report.note(lhs - 1.0 / x - 1e-12, "gamma tail bound violated at s=" + format_g17(s) +
                                           ", x=" + format_g17(x));
    return report;
}

CheckReport log_linear_check(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("log_linear_check: a must be positive");
    if (x < a * a) throw DomainViolation("log_linear_check: x below a^2");
    CheckReport report;
    report.name = "log_linear";
    report.note(a * std::log(x) - x,
                "a log x > x at a=" + format_g17(a) + ", x=" + format_g17(x));
    return report;
}

double moment_bound(const TailProfile& profile, double p, double r) {
    if (!(p >= 1.0)) throw std::invalid_argument("moment_bound: p must be >= 1");
    if (!(r >= 0.0)) throw std::invalid_argument("moment_bound: r must be nonnegative");
    const double shape = p / profile.alpha;
    const double scale = (2.0 * p / profile.alpha) * std::pow(profile.c, -shape);
    if (r == 0.0) return scale * std::tgamma(shape);
    const double z = profile.c * std::pow(r, profile.alpha);
    return 2.0 * std::pow(r, p) * std::exp(-z) + scale * incomplete_gamma(shape, z);
}

double stability_constant(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                          const DiscreteMeasure& tmu1, const DiscreteMeasure& tmu2, double p) {
    const double bracket = measures::moment(mu1, p) + measures::moment(mu2, p) +
                           measures::moment(tmu1, p) + measures::moment(tmu2, p);
    return std::pow(bracket, p - 1.0);
}

CheckReport stability_gap_check(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                                const DiscreteMeasure& tmu1, const DiscreteMeasure& tmu2,
                                const CostSpec& cost, double epsilon, double c_global,
                                const SolverConfig& cfg) {
    if (c_global < 0.0) c_global = cost.p * cost.cp * std::pow(2.0, cost.p);
    SolverConfig run = cfg;
    run.epsilon = epsilon;
    const double lhs = std::abs(eot::solve(mu1, mu2, cost, run).value -
                                eot::solve(tmu1, tmu2, cost, run).value);
    const double level = stability_constant(mu1, mu2, tmu1, tmu2, cost.p);
    const double w = transport::quad_wp(mu1, mu2, tmu1, tmu2, cost.p);
    const double rhs = c_global * level * w;

    CheckReport report;
    report.name = "stability_gap";
    const double ratio = level * w > 0.0 ? lhs / (level * w) : 0.0;
    report.note(lhs - rhs - 1e-8, "stability gap " + format_g17(lhs) + " exceeds " +
                                      format_g17(rhs) + " (needs constant " +
                                      format_g17(ratio) + ")");
    if (report.detail.empty())
        report.detail = "ratio " + format_g17(ratio);
    return report;
}

double truncation_wp_bound(const DiscreteMeasure& m, double r, double p) {
    const double tail = measures::tail_mass(m, r);
    if (tail == 0.0) return 0.0;
    const DiscreteMeasure inside = measures::restrict(m, r);  // NoMassInBall if empty
    const DiscreteMeasure outside = measures::restrict_complement(m, r);
    const double inner = std::pow(measures::moment(inside, p), p);
    const double outer = std::pow(measures::moment(outside, p), p);
    return std::pow(2.0, p - 1.0) * tail * (inner + outer);
}

std::pair<double, double> binomial_reciprocal_sums(std::int64_t n, double a) {
    auto log_choose = [n](std::int64_t j) {
        return std::lgamma(static_cast<double>(n) + 1.0) -
               std::lgamma(static_cast<double>(j) + 1.0) -
               std::lgamma(static_cast<double>(n - j) + 1.0);
    };
    double half = 0.0, quarter = 0.0;
    for (std::int64_t j = 1; j <= n; ++j) {
        double log_term = log_choose(j) + static_cast<double>(j) * std::log(a);
        if (j < n) {
            if (a >= 1.0) continue;  // (1-a)^{n-j} vanishes
            log_term += static_cast<double>(n - j) * std::log1p(-a);
        }
        const double term = std::exp(log_term);
        const double dj = static_cast<double>(j);
        half += term / std::sqrt(dj);
        quarter += term / std::pow(dj, 0.25);
    }
    return {half, quarter};
}

CheckReport binomial_sum_check(std::int64_t n, double a) {
    if (n < 4) throw std::invalid_argument("binomial_sum_check: n must be >= 4");
    if (!(a > 0.0) || a > 1.0)
        throw std::invalid_argument("binomial_sum_check: a must lie in (0, 1]");
    const double dn = static_cast<double>(n);
    if (a < 1.0 - 2.0 / (dn * dn))
        throw DomainViolation("binomial_sum_check: a below 1 - 2/n^2");
    const auto [half, quarter] = binomial_reciprocal_sums(n, a);
    const double constant = 1.0 / (1.0 - 2.0 * std::sqrt(2.0) / 3.0);
    CheckReport report;
    report.name = "binomial_sums";
    report.note(half * std::sqrt(dn) - constant,
                "j^{-1/2} binomial sum exceeds bound at n=" + std::to_string(n));
    report.note(quarter * std::pow(dn, 0.25) - constant,
                "j^{-1/4} binomial sum exceeds bound at n=" + std::to_string(n));
    return report;
}

BoundBreakdown theorem1_bound(const BoundInputs& inputs, std::span<const Point> support_mu,
                              std::span<const Point> support_nu) {
    validate_inputs(inputs);
    BoundBreakdown out;
    out.r_mu = truncation_radius(inputs.profile_mu, inputs.p, inputs.n);
    out.r_nu = truncation_radius(inputs.profile_nu, inputs.p, inputs.n);

    const double root_n = sqrt_n(inputs.n);
    out.moment_term =
        inputs.c_global / root_n *
        (1.0 + std::pow(inputs.profile_mu.c, -inputs.p / inputs.profile_mu.alpha) +
         std::pow(inputs.profile_nu.c, -inputs.p / inputs.profile_nu.alpha));

    const double reach = out.r_mu + out.r_nu;
    const double scale = inputs.epsilon / std::pow(reach, inputs.p - 1.0);
    auto truncated = [](std::span<const Point> support, double radius) {
        std::vector<Point> kept;
        for (const auto& pt : support)
            if (norm(pt) < radius) kept.push_back(pt);
        return kept;
    };
    const std::vector<Point> ball_mu = truncated(support_mu, out.r_mu);
    const std::vector<Point> ball_nu = truncated(support_nu, out.r_nu);
    out.covering_counts = {
        ball_mu.empty() ? 0 : covering::greedy_cover(ball_mu, scale).count,
        ball_nu.empty() ? 0 : covering::greedy_cover(ball_nu, scale).count};
    const double cover_min = static_cast<double>(
        std::min(out.covering_counts.first, out.covering_counts.second));

    out.covering_term = inputs.c_global / root_n *
                        (inputs.epsilon + std::pow(reach, inputs.p)) * std::sqrt(cover_min);
    out.total = out.moment_term + out.covering_term;
    return out;
}

double subgaussian_bound(double sigma, std::size_t d, double p, double epsilon, std::int64_t n,
                         double c_global) {
    if (!(sigma > 0.0) || d == 0 || n < 4 || !(epsilon > 0.0) || !(p >= 2.0))
        throw std::invalid_argument("subgaussian_bound: invalid parameters");
    const double dd = static_cast<double>(d);
    // envelope = (d sigma^2 v 1)^2 log n controls radii and scales; the
    // covering number is replaced by the Euclidean ball envelope, which keeps
    // the expression closed-form for full-dimensional supports.
    const double envelope = std::pow(std::max(dd * sigma * sigma, 1.0), 2.0) *
                            std::log(static_cast<double>(n));
    const double amplitude = std::max(1.0, epsilon) + std::pow(envelope, p / 2.0);
    const double cover = std::pow(
        1.0 + 2.0 * c_global * std::pow(envelope, p / 2.0) / epsilon, dd / 2.0);
    return c_global / sqrt_n(n) * amplitude * cover;
}

double subgaussian_p2_bound(double sigma, std::size_t d, double epsilon, std::int64_t n,
                            double c_global) {
    if (!(sigma >= 1.0))
        throw std::invalid_argument("subgaussian_p2_bound: requires sigma >= 1");
    if (d == 0 || n < 4 || !(epsilon > 0.0))
        throw std::invalid_argument("subgaussian_p2_bound: invalid parameters");
    const double dd = static_cast<double>(d);
    const double inner = std::max(1.0, epsilon) +
                         c_global * dd * dd * std::pow(sigma, 4.0) *
                             std::log(static_cast<double>(n)) / epsilon;
    return c_global / sqrt_n(n) * std::pow(inner, dd / 2.0 + 1.0);
}

double nu_compact_bound(const TailProfile& profile_mu, const DiscreteMeasure& nu, double p,
                        double epsilon, std::int64_t n, double c_global, double r_nu) {
    if (n < 4 || !(epsilon > 0.0) || !(p >= 2.0))
        throw std::invalid_argument("nu_compact_bound: invalid parameters");
    if (r_nu <= 0.0)
        for (const auto& pt : nu.points) r_nu = std::max(r_nu, norm(pt));
    const double r_mu = truncation_radius(profile_mu, p, n);
    const double mp_nu_p = std::pow(measures::moment(nu, p), p);
    const double scale = epsilon / std::pow(r_mu + r_nu, p - 1.0);
    const double cover =
        static_cast<double>(covering::greedy_cover(nu.points, scale).count);
    const double moment_part =
        c_global / sqrt_n(n) *
        (1.0 + std::pow(profile_mu.c, -p / profile_mu.alpha) + mp_nu_p);
    const double covering_part = c_global / sqrt_n(n) *
                                 (epsilon + std::pow(r_mu, p)) * std::sqrt(cover);
    return moment_part + covering_part;
}

double semidiscrete_bound(const TailProfile& profile_mu, std::size_t k, double mp_nu_p, double p,
                          double epsilon, std::int64_t n, double c_global) {
    if (k == 0 || n < 4 || !(epsilon > 0.0) || !(p >= 2.0))
        throw std::invalid_argument("semidiscrete_bound: invalid parameters");
    const double r_mu = truncation_radius(profile_mu, p, n);
    return c_global / sqrt_n(n) *
               (1.0 + std::pow(profile_mu.c, -p / profile_mu.alpha) + mp_nu_p) +
           c_global / sqrt_n(n) * (epsilon + std::pow(r_mu, p)) *
               std::sqrt(static_cast<double>(k));
}

double manifold_bound(const TailProfile& profile_mu, double c_nu, double d_nu, double r_nu,
                      double mp_nu_p, double p, double epsilon, std::int64_t n,
                      double c_global) {
    if (!(c_nu > 0.0) || !(d_nu > 0.0) || n < 4 || !(epsilon > 0.0) || !(p >= 2.0))
        throw std::invalid_argument("manifold_bound: invalid parameters");
    const double r_mu = truncation_radius(profile_mu, p, n);
    const double cover_factor = std::sqrt(c_nu) *
        std::pow(std::pow(r_mu + r_nu, p - 1.0) / epsilon, d_nu / 2.0);
    return c_global / sqrt_n(n) *
               (1.0 + std::pow(profile_mu.c, -p / profile_mu.alpha) + mp_nu_p) +
           c_global / sqrt_n(n) * (epsilon + std::pow(r_mu, p)) * cover_factor;
}

double corollary_bound(CorollaryKind kind, const std::map<std::string, double>& params,
                       const std::optional<DiscreteMeasure>& nu,
                       const std::optional<TailProfile>& profile_mu) {
    const double c_global =
        params.count("c_global") ? params.at("c_global") : 1.0;
    auto need_profile = [&]() -> const TailProfile& {
        if (!profile_mu)
            throw std::invalid_argument("corollary_bound: missing mu tail profile");
        return *profile_mu;
    };
    switch (kind) {
        case CorollaryKind::subgaussian:
            return subgaussian_bound(require(params, "sigma"),
                                     static_cast<std::size_t>(require(params, "d")),
                                     require(params, "p"), require(params, "epsilon"),
                                     static_cast<std::int64_t>(require(params, "n")), c_global);
        case CorollaryKind::subgaussian_p2:
            return subgaussian_p2_bound(require(params, "sigma"),
                                        static_cast<std::size_t>(require(params, "d")),
                                        require(params, "epsilon"),
                                        static_cast<std::int64_t>(require(params, "n")),
                                        c_global);
        case CorollaryKind::nu_compact:
            if (!nu) throw std::invalid_argument("corollary_bound: missing nu measure");
            return nu_compact_bound(need_profile(), *nu, require(params, "p"),
                                    require(params, "epsilon"),
                                    static_cast<std::int64_t>(require(params, "n")), c_global,
                                    params.count("r_nu") ? params.at("r_nu") : 0.0);
        case CorollaryKind::semidiscrete:
            return semidiscrete_bound(need_profile(),
                                      static_cast<std::size_t>(require(params, "K")),
                                      require(params, "mp_nu_p"), require(params, "p"),
                                      require(params, "epsilon"),
                                      static_cast<std::int64_t>(require(params, "n")), c_global);
        case CorollaryKind::manifold:
            return manifold_bound(need_profile(), require(params, "C_nu"),
                                  require(params, "d_nu"), require(params, "r_nu"),
                                  require(params, "mp_nu_p"), require(params, "p"),
                                  require(params, "epsilon"),
                                  static_cast<std::int64_t>(require(params, "n")), c_global);
    }
    throw std::invalid_argument("corollary_bound: unknown kind");
}

nlohmann::json to_json(const BoundBreakdown& breakdown) {
    return nlohmann::json{{"r_mu", breakdown.r_mu},
                          {"r_nu", breakdown.r_nu},
                          {"moment_term", breakdown.moment_term},
                          {"covering_term", breakdown.covering_term},
                          {"total", breakdown.total},
                          {"covering_counts",
                           {breakdown.covering_counts.first, breakdown.covering_counts.second}}};
}

}  // namespace eotlab::bounds
