#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "eotlab/check_report.hpp"
#include "eotlab/common.hpp"
#include "eotlab/costs.hpp"
#include "eotlab/measures.hpp"

namespace eotlab {

struct SolverConfig {
    double tolerance = 1e-12;   // max over the two marginals of the L1 violation
    int max_iterations = 200000;
    double epsilon = 1.0;
};

// Converged entropic transport instance. Potentials are normalized so that
// sum_i a_i f_i = sum_j b_j g_j = value / 2, which pins the additive shift
// the alternating updates leave free. Immutable and safe to share.
struct EotSolution {
    std::vector<double> f;
    std::vector<double> g;
    Matrix plan;          // plan_ij = a_i b_j exp((f_i + g_j - c_ij) / epsilon)
    double value = 0.0;   // cost + epsilon * relative entropy of the plan
    double epsilon = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;

    DiscreteMeasure mu;   // marginals echoed for diagnostics
    DiscreteMeasure nu;
    Matrix cost_matrix;
};

struct MaxIterationsExceeded : std::runtime_error {
    MaxIterationsExceeded(const std::string& what, EotSolution sol)
        : std::runtime_error(what), diagnostics(std::move(sol)) {}
    EotSolution diagnostics;
};

namespace eot {

// Log-domain alternating dual ascent with stabilized log-sum-exp; mandatory
// here because costs grow like |x-y|^p and radii like log n, which overflow
// plain kernels at small epsilon. Warm-starts through a geometric epsilon
// schedule when the target is far below the cost scale.
EotSolution solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& cost,
                  const SolverConfig& cfg);

// cost integral plus epsilon times relative entropy against the product
// coupling; 0 log 0 = 0, entries below 1e-300 are treated as zero mass.
double primal_value(const Matrix& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                    const CostSpec& cost, double epsilon);

// Unconstrained dual objective at (f, g); at most the primal value of any
// feasible plan.
double dual_value(std::span<const double> f, std::span<const double> g,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& cost,
                  double epsilon);

// Density of the plan against the product coupling: exp((f_i+g_j-c_ij)/eps).
// Weighted row and column means are 1 at convergence.
Matrix density(const EotSolution& sol);

// Verifies value(epsilon, c) == epsilon * value(1, c/epsilon) on one instance.
CheckReport scaling_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          const CostSpec& cost, double epsilon, const SolverConfig& cfg = {});

// For marginals supported in balls of radii r and s: sup-norm of the
// potentials at most cp (r+s)^p, atom-pair difference quotients at most
// cp (r+s)^{p-1}.
CheckReport potential_bounds_check(const EotSolution& sol, double r, double s,
                                   const CostSpec& cost, double slack = 1e-6);

nlohmann::json solution_to_json(const EotSolution& sol);

// Sparse triplet rows "i,j,mass" for entries with mass > 1e-15.
void save_plan_csv(const EotSolution& sol, const std::string& path);

}  // namespace eot
}  // namespace eotlab
