#pragma once

#include <cstddef>
#include <vector>

#include "eotlab/common.hpp"
#include "eotlab/measures.hpp"

namespace eotlab::transport {

struct LpResult {
    bool feasible = false;
    double objective = 0.0;
    std::vector<double> x;
};

// min c^T x subject to A x = b, x >= 0, with b >= 0. Dense two-phase simplex
// with Bland pivoting, so it terminates on the degenerate instances that
// transport problems routinely produce. Intended for small oracles only.
LpResult solve_lp(const Matrix& a, const std::vector<double>& b, const std::vector<double>& c);

// W_p(mu, nu)^p via the transportation linear program; exact up to simplex
// arithmetic on instances with at most max_atoms atoms per side.
double exact_wp_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                  std::size_t max_atoms = 12);

// Combined distance for measure quadruples:
// (W_p(mu1, tmu1)^p + W_p(mu2, tmu2)^p)^{1/p}.
double quad_wp(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
               const DiscreteMeasure& tmu1, const DiscreteMeasure& tmu2, double p);

}  // namespace eotlab::transport
