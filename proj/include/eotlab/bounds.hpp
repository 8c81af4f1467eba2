#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include <json.hpp>

#include "eotlab/check_report.hpp"
#include "eotlab/common.hpp"
#include "eotlab/costs.hpp"
#include "eotlab/eot.hpp"
#include "eotlab/measures.hpp"

namespace eotlab {

// Everything the finite-sample bound needs besides the supports. c_global is
// the otherwise-unspecified constant, kept as an explicit dial (default 1):
// the artifact reports bound curves up to constants, and rate comparisons
// rather than absolute dominance are the contract.
struct BoundInputs {
    TailProfile profile_mu;
    TailProfile profile_nu;
    double p = 2.0;
    double cp = 2.0;
    double epsilon = 1.0;
    std::int64_t n = 4;
    double c_global = 1.0;
};

struct BoundBreakdown {
    double r_mu = 0.0;
    double r_nu = 0.0;
    double moment_term = 0.0;
    double covering_term = 0.0;
    double total = 0.0;
    std::pair<std::size_t, std::size_t> covering_counts{0, 0};
};

enum class CorollaryKind { subgaussian, subgaussian_p2, nu_compact, semidiscrete, manifold };

namespace bounds {

// [4p c^{-1} (c^{-1} v 1) (p/alpha v 1)^2 log n]^{1/alpha}; chosen so that
// c r^alpha >= log(n^p), which makes tail terms decay with the leading term.
double truncation_radius(const TailProfile& profile, double p, std::int64_t n);

// Upper incomplete gamma: integral of t^{s-1} e^{-t} over [x, infinity).
// Series branch below s+1, continued fraction above.
double incomplete_gamma(double s, double x);

// Gamma(s, (s v 1) log x) <= 1/x for x >= 4 s^2 v e; DomainViolation below.
CheckReport gamma_tail_check(double s, double x);

// a log x <= x for x >= a^2.
CheckReport log_linear_check(double a, double x);

// r = 0: bound on the full p-th moment of a measure with tail envelope
// (c, alpha). r > 0: bound on the p-th moment mass outside the radius-r ball:
// 2 r^p exp(-c r^alpha) + (2p/alpha) c^{-p/alpha} Gamma(p/alpha, c r^alpha).
double moment_bound(const TailProfile& profile, double p, double r = 0.0);

// [M_p(mu1) + M_p(mu2) + M_p(tmu1) + M_p(tmu2)]^{p-1}; the value-stability
// Lipschitz factor up to the constant multiplied in downstream.
double stability_constant(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                          const DiscreteMeasure& tmu1, const DiscreteMeasure& tmu2, double p);

// Checks |value(mu1,mu2) - value(tmu1,tmu2)| <= c_global * L * W on one
// quadruple, with W computed by the exact transport LP (instances of at most
// 12 atoms per measure). c_global < 0 selects the calibrated default
// p * cp * 2^p.
CheckReport stability_gap_check(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                                const DiscreteMeasure& tmu1, const DiscreteMeasure& tmu2,
                                const CostSpec& cost, double epsilon, double c_global = -1.0,
                                const SolverConfig& cfg = {});

// Upper bound for W_p(m, restriction of m to B_r)^p through the coupling
// that keeps inside mass fixed and redistributes the tail:
// 2^{p-1} tail (M_p(inside)^p + M_p(outside)^p).
double truncation_wp_bound(const DiscreteMeasure& m, double r, double p);

// Both binomial reciprocal-moment sums, exact via log-space binomials.
std::pair<double, double> binomial_reciprocal_sums(std::int64_t n, double a);
// Asserts sqrt(n) * sum_{j} j^{-1/2} Bin(n,a)(j) and n^{1/4} * sum_j j^{-1/4}
// Bin(n,a)(j) are at most 1/(1 - 2 sqrt(2)/3), for a >= 1 - 2/n^2.
CheckReport binomial_sum_check(std::int64_t n, double a);

// The finite-sample error bound: moment term plus covering term, evaluated
// on explicit ground-truth supports.
BoundBreakdown theorem1_bound(const BoundInputs& inputs, std::span<const Point> support_mu,
                              std::span<const Point> support_nu);

double subgaussian_bound(double sigma, std::size_t d, double p, double epsilon, std::int64_t n,
                         double c_global = 1.0);
double subgaussian_p2_bound(double sigma, std::size_t d, double epsilon, std::int64_t n,
                            double c_global = 1.0);
double nu_compact_bound(const TailProfile& profile_mu, const DiscreteMeasure& nu, double p,
                        double epsilon, std::int64_t n, double c_global = 1.0,
                        double r_nu = 0.0);
double semidiscrete_bound(const TailProfile& profile_mu, std::size_t k, double mp_nu_p, double p,
                          double epsilon, std::int64_t n, double c_global = 1.0);
double manifold_bound(const TailProfile& profile_mu, double c_nu, double d_nu, double r_nu,
                      double mp_nu_p, double p, double epsilon, std::int64_t n,
                      double c_global = 1.0);

// Dispatcher used by the CLI; throws on missing parameters.
double corollary_bound(CorollaryKind kind, const std::map<std::string, double>& params,
                       const std::optional<DiscreteMeasure>& nu = std::nullopt,
                       const std::optional<TailProfile>& profile_mu = std::nullopt);

nlohmann::json to_json(const BoundBreakdown& breakdown);

}  // namespace bounds
}  // namespace eotlab
