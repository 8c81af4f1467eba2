#include "eotlab/transport.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eotlab::transport {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-9;

// Tableau simplex, Bland entering/leaving rule. Columns are the structural
// variables followed by one artificial per row.
struct Tableau {
    std::size_t rows, cols;    // structural columns only
    Matrix t;                  // rows x (cols + rows + 1), last column is RHS
    std::vector<std::size_t> basis;

    Tableau(const Matrix& a, const std::vector<double>& b)
        : rows(a.rows), cols(a.cols), t(a.rows, a.cols + a.rows + 1), basis(a.rows) {
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) t(i, j) = a(i, j);
            t(i, cols + i) = 1.0;
            t(i, cols + rows) = b[i];
            basis[i] = cols + i;
        }
    }

    double rhs(std::size_t i) const { return t(i, cols + rows); }

    void pivot(std::size_t r, std::size_t c) {
        const double piv = t(r, c);
        for (std::size_t j = 0; j <= cols + rows; ++j) t(r, j) /= piv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r) continue;
            const double factor = t(i, c);
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j <= cols + rows; ++j) t(i, j) -= factor * t(r, j);
        }
        basis[r] = c;
    }

    // Minimizes obj over columns [0, limit); returns false on unboundedness.
    bool run(const std::vector<double>& obj, std::size_t limit) {
        while (true) {
            std::vector<double> y(rows);  // multipliers for reduced costs
            for (std::size_t i = 0; i < rows; ++i) y[i] = obj[basis[i]];
            std::size_t enter = limit;
            for (std::size_t j = 0; j < limit; ++j) {
                double reduced = obj[j];
                for (std::size_t i = 0; i < rows; ++i) reduced -= y[i] * t(i, j);
                if (reduced < -kCostTol) {
                    enter = j;  // Bland: lowest eligible index
                    break;
                }
            }
            if (enter == limit) return true;
            std::size_t leave = rows;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < rows; ++i) {
                if (t(i, enter) > kPivotTol) {
                    const double ratio = rhs(i) / t(i, enter);
                    if (ratio < best_ratio - kPivotTol ||
                        (std::abs(ratio - best_ratio) <= kPivotTol &&
                         (leave == rows || basis[i] < basis[leave]))) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave == rows) return false;
            pivot(leave, enter);
        }
    }
};

}  // namespace

LpResult solve_lp(const Matrix& a, const std::vector<double>& b, const std::vector<double>& c) {
    if (a.rows != b.size() || a.cols != c.size())
        throw std::invalid_argument("solve_lp: shape mismatch");
    for (double v : b)
        if (v < 0.0) throw std::invalid_argument("solve_lp: rhs must be nonnegative");

    Tableau tab(a, b);
    const std::size_t rows = a.rows, cols = a.cols;

    // Phase 1: minimize the artificial mass.
    std::vector<double> phase1(cols + rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) phase1[cols + i] = 1.0;
    if (!tab.run(phase1, cols + rows))
        throw std::runtime_error("solve_lp: phase 1 unbounded");
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        if (tab.basis[i] >= cols) infeasibility += tab.rhs(i);
    if (infeasibility > 1e-9) return {false, 0.0, {}};

    // Drive leftover zero-level artificials from the basis where possible.
    for (std::size_t i = 0; i < rows; ++i) {
        if (tab.basis[i] < cols) continue;
        for (std::size_t j = 0; j < cols; ++j) {
            if (std::abs(tab.t(i, j)) > kPivotTol) {
                tab.pivot(i, j);
                break;
            }
        }
    }

    // Phase 2 over structural columns only.
    std::vector<double> phase2(cols + rows, 0.0);
    for (std::size_t j = 0; j < cols; ++j) phase2[j] = c[j];
    if (!tab.run(phase2, cols))
        throw std::runtime_error("solve_lp: objective unbounded");

    LpResult result;
    result.feasible = true;
    result.x.assign(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        if (tab.basis[i] < cols) result.x[tab.basis[i]] = tab.rhs(i);
    std::vector<double> terms(cols);
    for (std::size_t j = 0; j < cols; ++j) terms[j] = c[j] * result.x[j];
    result.objective = kahan_sum(terms);
    return result;
}

double exact_wp_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                  std::size_t max_atoms) {
    if (mu.dim != nu.dim) throw std::invalid_argument("exact_wp_p: dimension mismatch");
    if (mu.size() > max_atoms || nu.size() > max_atoms)
        throw std::invalid_argument("exact_wp_p: instance larger than the oracle limit");
    const std::size_t m = mu.size(), n = nu.size();

    // Row sums and all but the last column sum; the final one is redundant.
    Matrix a(m + n - 1, m * n, 0.0);
    std::vector<double> b(m + n - 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) a(i, i * n + j) = 1.0;
        b[i] = mu.weights[i];
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) a(m + j, i * n + j) = 1.0;
        b[m + j] = nu.weights[j];
    }
    std::vector<double> cost(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cost[i * n + j] = std::pow(distance(mu.points[i], nu.points[j]), p);

    const LpResult lp = solve_lp(a, b, cost);
    if (!lp.feasible) throw std::runtime_error("exact_wp_p: infeasible coupling polytope");
    return lp.objective;
}

double quad_wp(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
               const DiscreteMeasure& tmu1, const DiscreteMeasure& tmu2, double p) {
    const double w1 = exact_wp_p(mu1, tmu1, p);
    const double w2 = exact_wp_p(mu2, tmu2, p);
    return std::pow(w1 + w2, 1.0 / p);
}

}  // namespace eotlab::transport
