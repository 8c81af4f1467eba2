#include "eotlab/eot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "eotlab/errors.hpp"

namespace eotlab::eot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> log_weights(const DiscreteMeasure& m) {
    std::vector<double> lw(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        lw[i] = m.weights[i] > 0.0 ? std::log(m.weights[i]) : kNegInf;
    return lw;
}

Matrix cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& cost) {
    Matrix c(mu.size(), nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (std::size_t j = 0; j < nu.size(); ++j) {
            const double v = costs::eval_cost(cost, mu.points[i], nu.points[j]);
            if (!std::isfinite(v))
                throw NonFiniteKernel("solve: cost is not finite at atom pair (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
            c(i, j) = v;
        }
    }
    return c;
}

// One half-sweep updates f so row marginals hold, the other updates g so
// column marginals hold; both are exact log-sum-exp c-transforms.
struct SinkhornState {
    const Matrix& c;
    const std::vector<double>& loga;
    const std::vector<double>& logb;
    std::vector<double> f, g;

    void sweep(double eps) {
        const std::size_t m = c.rows, n = c.cols;
        for (std::size_t i = 0; i < m; ++i) {
            double mx = kNegInf;
            for (std::size_t j = 0; j < n; ++j) {
                if (logb[j] == kNegInf) continue;
                mx = std::max(mx, (g[j] - c(i, j)) / eps + logb[j]);
            }
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (logb[j] == kNegInf) continue;
                s += std::exp((g[j] - c(i, j)) / eps + logb[j] - mx);
            }
            f[i] = -eps * (mx + std::log(s));
        }
        for (std::size_t j = 0; j < n; ++j) {
            double mx = kNegInf;
            for (std::size_t i = 0; i < m; ++i) {
                if (loga[i] == kNegInf) continue;
                mx = std::max(mx, (f[i] - c(i, j)) / eps + loga[i]);
            }
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (loga[i] == kNegInf) continue;
                s += std::exp((f[i] - c(i, j)) / eps + loga[i] - mx);
            }
            g[j] = -eps * (mx + std::log(s));
        }
    }

    // L1 marginal violation of the implied plan, max over the two marginals.
    double residual(double eps, const DiscreteMeasure& mu, const DiscreteMeasure& nu) const {
        const std::size_t m = c.rows, n = c.cols;
        std::vector<double> row(m, 0.0), col(n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            if (loga[i] == kNegInf) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (logb[j] == kNegInf) continue;
                const double e =
                    std::exp(loga[i] + logb[j] + (f[i] + g[j] - c(i, j)) / eps);
                row[i] += e;
                col[j] += e;
            }
        }
        double res_mu = 0.0, res_nu = 0.0;
        for (std::size_t i = 0; i < m; ++i) res_mu += std::abs(row[i] - mu.weights[i]);
        for (std::size_t j = 0; j < n; ++j) res_nu += std::abs(col[j] - nu.weights[j]);
        return std::max(res_mu, res_nu);
    }
};

double median_cost(const Matrix& c) {
    std::vector<double> v(c.data);
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

// Gaussian elimination with partial pivoting for the Newton systems below.
bool solve_linear(std::vector<std::vector<double>>& a, std::vector<double>& rhs) {
    const std::size_t k = rhs.size();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) return false;
        std::swap(a[col], a[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (std::size_t r = col + 1; r < k; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t cc = col; cc < k; ++cc) a[r][cc] -= f * a[col][cc];
            rhs[r] -= f * rhs[col];
        }
    }
    for (std::size_t row = k; row-- > 0;) {
        for (std::size_t cc = row + 1; cc < k; ++cc) rhs[row] -= a[row][cc] * rhs[cc];
        rhs[row] /= a[row][row];
    }
    return true;
}

// Damped Newton on the marginal-matching system in the potentials, with the
// additive gauge pinned by freezing the last g coordinate. The alternating
// updates converge linearly with a factor that degenerate instances push
// within 1e-5 of 1; this finisher turns their tail quadratic. Only worth
// assembling for moderate problem sizes.
bool newton_finish(SinkhornState& st, double eps, const DiscreteMeasure& mu,
                   const DiscreteMeasure& nu, double tolerance, double& res) {
    const std::size_t m = st.c.rows, n = st.c.cols;
    const std::size_t dim = m + n - 1;
    bool improved_any = false;
    for (int step = 0; step < 40; ++step) {
        Matrix plan(m, n, 0.0);
        std::vector<double> row(m, 0.0), col(n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            if (st.loga[i] == kNegInf) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (st.logb[j] == kNegInf) continue;
                const double e = std::exp(st.loga[i] + st.logb[j] +
                                          (st.f[i] + st.g[j] - st.c(i, j)) / eps);
                plan(i, j) = e;
                row[i] += e;
                col[j] += e;
            }
        }
        std::vector<double> residual_vec(dim, 0.0);
        for (std::size_t i = 0; i < m; ++i) residual_vec[i] = row[i] - mu.weights[i];
        for (std::size_t j = 0; j + 1 < n; ++j)
            residual_vec[m + j] = col[j] - nu.weights[j];

        std::vector<std::vector<double>> jac(dim, std::vector<double>(dim, 0.0));
        for (std::size_t i = 0; i < m; ++i) {
            jac[i][i] = row[i] / eps;
            for (std::size_t j = 0; j + 1 < n; ++j) jac[i][m + j] = plan(i, j) / eps;
        }
        for (std::size_t j = 0; j + 1 < n; ++j) {
            for (std::size_t i = 0; i < m; ++i) jac[m + j][i] = plan(i, j) / eps;
            jac[m + j][m + j] = col[j] / eps;
        }
        std::vector<double> delta(dim);
        for (std::size_t k = 0; k < dim; ++k) delta[k] = -residual_vec[k];
        if (!solve_linear(jac, delta)) return improved_any;

        bool moved = false;
        double t = 1.0;
        for (int back = 0; back < 30 && !moved; ++back) {
            std::vector<double> tf = st.f, tg = st.g;
            for (std::size_t i = 0; i < m; ++i) tf[i] += t * delta[i];
            for (std::size_t j = 0; j + 1 < n; ++j) tg[j] += t * delta[m + j];
            SinkhornState trial{st.c, st.loga, st.logb, std::move(tf), std::move(tg)};
            const double trial_res = trial.residual(eps, mu, nu);
            if (trial_res < res) {
                st.f = std::move(trial.f);
                st.g = std::move(trial.g);
                res = trial_res;
                moved = true;
                improved_any = true;
            } else {
                t *= 0.5;
            }
        }
        if (!moved) return improved_any;
        if (res <= tolerance) return true;
    }
    return improved_any;
}

}  // namespace

EotSolution solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& cost,
                  const SolverConfig& cfg) {
    if (mu.size() == 0 || nu.size() == 0) throw std::invalid_argument("solve: empty marginal");
    if (mu.dim != nu.dim) throw std::invalid_argument("solve: marginal dimension mismatch");
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("solve: epsilon must be positive");
    if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("solve: tolerance must be positive");
    if (cfg.max_iterations <= 0)
        throw std::invalid_argument("solve: max_iterations must be positive");

    const Matrix c = cost_matrix(mu, nu, cost);
    const std::vector<double> loga = log_weights(mu);
    const std::vector<double> logb = log_weights(nu);

    SinkhornState st{c, loga, logb, std::vector<double>(mu.size(), 0.0),
                     std::vector<double>(nu.size(), 0.0)};

    int iterations = 0;
    double res = std::numeric_limits<double>::infinity();

    // Geometric warm start when the target epsilon sits far below the cost
    // scale; loose tolerance, bounded share of the iteration budget.
    const double med = median_cost(c);
    if (cfg.epsilon < 0.05 * med) {
        const int warm_cap = std::max(1, cfg.max_iterations / 4);
        const double warm_tol = std::max(cfg.tolerance, 1e-3);
        double eps_level = med;
        while (eps_level > cfg.epsilon && iterations < warm_cap) {
            for (int k = 0; k < 200 && iterations < warm_cap; ++k) {
                st.sweep(eps_level);
                ++iterations;
                if (st.residual(eps_level, mu, nu) <= warm_tol) break;
            }
            eps_level = std::max(cfg.epsilon, eps_level / 4.0);
        }
    }

    bool converged = false;
    double prev_res = std::numeric_limits<double>::infinity();
    int finisher_cooldown = 32;
    const bool allow_finisher = mu.size() + nu.size() <= 1024;
    while (iterations < cfg.max_iterations) {
        st.sweep(cfg.epsilon);
        ++iterations;
        res = st.residual(cfg.epsilon, mu, nu);
        if (res <= cfg.tolerance) {
            converged = true;
            break;
        }
        // A sweep ratio near 1 means a nearly degenerate plan; hand the tail
        // to the quadratic finisher instead of grinding linearly.
        const bool slow = res > 0.97 * prev_res;
        prev_res = res;
        --finisher_cooldown;
        if (allow_finisher && slow && finisher_cooldown <= 0) {
            newton_finish(st, cfg.epsilon, mu, nu, cfg.tolerance, res);
            prev_res = res;
            if (res <= cfg.tolerance) {
                converged = true;
                break;
            }
            finisher_cooldown = 64;
        }
    }

    EotSolution sol;
    sol.epsilon = cfg.epsilon;
    sol.iterations = iterations;
    sol.residual = res;
    sol.converged = converged;
    sol.mu = mu;
    sol.nu = nu;
    sol.cost_matrix = c;
    sol.f = st.f;
    sol.g = st.g;

    sol.plan = Matrix(mu.size(), nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (loga[i] == kNegInf) continue;
        for (std::size_t j = 0; j < nu.size(); ++j) {
            if (logb[j] == kNegInf) continue;
            sol.plan(i, j) =
                std::exp(loga[i] + logb[j] + (st.f[i] + st.g[j] - c(i, j)) / cfg.epsilon);
        }
    }
    sol.value = primal_value(sol.plan, mu, nu, cost, cfg.epsilon);

    // Pin the additive shift: weighted means of f and g both equal value/2.
    {
        std::vector<double> fa(mu.size()), gb(nu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) fa[i] = mu.weights[i] * st.f[i];
        for (std::size_t j = 0; j < nu.size(); ++j) gb[j] = nu.weights[j] * st.g[j];
        const double shift = 0.5 * (kahan_sum(gb) - kahan_sum(fa));
        for (auto& v : sol.f) v += shift;
        for (auto& v : sol.g) v -= shift;
    }

    if (!converged)
        throw MaxIterationsExceeded(
            "solve: residual " + format_g17(res) + " above tolerance after " +
                std::to_string(iterations) + " iterations",
            std::move(sol));
    return sol;
}

double primal_value(const Matrix& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                    const CostSpec& cost, double epsilon) {
    if (plan.rows != mu.size() || plan.cols != nu.size())
        throw std::invalid_argument("primal_value: plan shape mismatch");
    std::vector<double> terms;
    terms.reserve(plan.rows * plan.cols);
    for (std::size_t i = 0; i < plan.rows; ++i) {
        for (std::size_t j = 0; j < plan.cols; ++j) {
            double q = plan(i, j);
            if (q <= 1e-300) continue;  // treated as zero mass
            const double ab = mu.weights[i] * nu.weights[j];
            if (ab <= 0.0)
                throw AbsoluteContinuityViolation(
                    "primal_value: plan mass outside the product support at (" +
                    std::to_string(i) + "," + std::to_string(j) + ")");
            const double cij = costs::eval_cost(cost, mu.points[i], nu.points[j]);
            terms.push_back(q * cij + epsilon * q * std::log(q / ab));
        }
    }
    return kahan_sum(terms);
}

double dual_value(std::span<const double> f, std::span<const double> g,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& cost,
                  double epsilon) {
    if (f.size() != mu.size() || g.size() != nu.size())
        throw std::invalid_argument("dual_value: potential shape mismatch");
    std::vector<double> fa(mu.size()), gb(nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) fa[i] = mu.weights[i] * f[i];
    for (std::size_t j = 0; j < nu.size(); ++j) gb[j] = nu.weights[j] * g[j];

    // Exponential moment in log space so feasible but wild potentials do not
    // overflow.
    double mx = kNegInf;
    std::vector<double> z;
    z.reserve(mu.size() * nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu.weights[i] <= 0.0) continue;
        for (std::size_t j = 0; j < nu.size(); ++j) {
            if (nu.weights[j] <= 0.0) continue;
            const double cij = costs::eval_cost(cost, mu.points[i], nu.points[j]);
            const double e = std::log(mu.weights[i]) + std::log(nu.weights[j]) +
                             (f[i] + g[j] - cij) / epsilon;
            z.push_back(e);
            mx = std::max(mx, e);
        }
    }
    double total = 0.0;
    if (mx > kNegInf) {
        double s = 0.0;
        for (double v : z) s += std::exp(v - mx);
        total = std::exp(mx + std::log(s));
    }
    return kahan_sum(fa) + kahan_sum(gb) - epsilon * (total - 1.0);
}

Matrix density(const EotSolution& sol) {
    Matrix d(sol.plan.rows, sol.plan.cols);
    for (std::size_t i = 0; i < d.rows; ++i)
        for (std::size_t j = 0; j < d.cols; ++j)
            d(i, j) = std::exp((sol.f[i] + sol.g[j] - sol.cost_matrix(i, j)) / sol.epsilon);
    return d;
}

CheckReport scaling_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          const CostSpec& cost, double epsilon, const SolverConfig& cfg) {
    SolverConfig direct = cfg;
    direct.epsilon = epsilon;
    const double lhs = solve(mu, nu, cost, direct).value;

    const CostSpec base = cost;
    CostSpec scaled = custom_cost(
        [base, epsilon](double t) { return costs::eval_profile(base, t) / epsilon; }, cost.p,
        cost.cp / epsilon);
    SolverConfig unit = cfg;
    unit.epsilon = 1.0;
    const double rhs = epsilon * solve(mu, nu, scaled, unit).value;

    CheckReport report;
    report.name = "scaling_identity";
    report.note(std::abs(lhs - rhs) - 1e-7 * (1.0 + std::abs(lhs)),
                "scaling identity gap " + format_g17(std::abs(lhs - rhs)) + " at epsilon " +
                    format_g17(epsilon));
    return report;
}

CheckReport potential_bounds_check(const EotSolution& sol, double r, double s,
                                   const CostSpec& cost, double slack) {
    for (const auto& pt : sol.mu.points)
        if (norm(pt) > r + 1e-12)
            throw std::invalid_argument("potential_bounds_check: mu not supported in B_r");
    for (const auto& pt : sol.nu.points)
        if (norm(pt) > s + 1e-12)
            throw std::invalid_argument("potential_bounds_check: nu not supported in B_s");

    const double sup_bound = cost.cp * std::pow(r + s, cost.p);
    const double lip_bound = cost.cp * std::pow(r + s, cost.p - 1.0);

    CheckReport report;
    report.name = "potential_bounds";
    for (double v : sol.f)
        report.note(std::abs(v) - sup_bound - slack, "sup bound violated on f");
    for (double v : sol.g)
        report.note(std::abs(v) - sup_bound - slack, "sup bound violated on g");

    auto lipschitz = [&](const DiscreteMeasure& m, const std::vector<double>& pot,
                         const char* which) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            for (std::size_t j = i + 1; j < m.size(); ++j) {
                const double gap = distance(m.points[i], m.points[j]);
                if (gap < 1e-12) continue;
                const double quotient = std::abs(pot[i] - pot[j]) / gap;
                report.note(quotient - lip_bound - slack,
                            std::string("Lipschitz bound violated on ") + which);
            }
        }
    };
    lipschitz(sol.mu, sol.f, "f");
    lipschitz(sol.nu, sol.g, "g");
    return report;
}

nlohmann::json solution_to_json(const EotSolution& sol) {
    return nlohmann::json{{"epsilon", sol.epsilon}, {"value", sol.value},
                          {"iterations", sol.iterations}, {"residual", sol.residual},
                          {"f", sol.f},               {"g", sol.g}};
}

void save_plan_csv(const EotSolution& sol, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_plan_csv: cannot open " + path);
    out << "i,j,mass\n";
    for (std::size_t i = 0; i < sol.plan.rows; ++i)
        for (std::size_t j = 0; j < sol.plan.cols; ++j)
            if (sol.plan(i, j) > 1e-15)
                out << i << ',' << j << ',' << format_g17(sol.plan(i, j)) << '\n';
    if (!out) throw std::runtime_error("save_plan_csv: write failed for " + path);
}

}  // namespace eotlab::eot
