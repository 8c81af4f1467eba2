#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "eotlab/bounds.hpp"
#include "eotlab/checks.hpp"
#include "eotlab/covering.hpp"
#include "eotlab/eot.hpp"
#include "eotlab/harness.hpp"
#include "eotlab/measures.hpp"

namespace {

using namespace eotlab;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

TailProfile parse_profile(const std::string& text) {
    // "c,alpha" pairs, e.g. --mu-profile 0.5,2
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw std::runtime_error("profile must be 'c,alpha'");
    return make_tail_profile(std::stod(text.substr(0, comma)),
                             std::stod(text.substr(comma + 1)));
}

int cmd_solve(const std::string& mu_path, const std::string& nu_path, double epsilon, double p,
              double cp, double tolerance, int max_iterations, const std::string& output,
              const std::string& format, bool plan_csv) {
    const DiscreteMeasure mu = measures::load_csv(mu_path);
    const DiscreteMeasure nu = measures::load_csv(nu_path);
    SolverConfig cfg{tolerance, max_iterations, epsilon};
    const CostSpec cost = cp > 0.0 ? power_cost(p, cp) : power_cost(p);
    const EotSolution sol = eot::solve(mu, nu, cost, cfg);

    std::printf("value      %.12g\n", sol.value);
    std::printf("iterations %d\n", sol.iterations);
    std::printf("residual   %.3g\n", sol.residual);
    if (!output.empty()) {
        std::filesystem::create_directories(output);
        const std::filesystem::path dir(output);
        if (format == "json")
            write_text((dir / "solution.json").string(),
                       eot::solution_to_json(sol).dump(2) + "\n");
        if (plan_csv) eot::save_plan_csv(sol, (dir / "plan.csv").string());
    }
    return 0;
}

int cmd_bound(std::int64_t n, double epsilon, double p, double cp, double c_global,
              const std::string& mu_profile, const std::string& nu_profile,
              const std::string& support_mu, const std::string& support_nu,
              const std::string& kind, const std::vector<std::string>& extra,
              const std::string& output) {
    std::map<std::string, double> params{{"n", static_cast<double>(n)},
                                         {"epsilon", epsilon},
                                         {"p", p},
                                         {"c_global", c_global}};
    for (const auto& kv : extra) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error("--param expects key=value");
        params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }

    if (kind == "theorem1") {
        BoundInputs inputs;
        inputs.profile_mu = parse_profile(mu_profile);
        inputs.profile_nu = parse_profile(nu_profile);
        inputs.p = p;
        inputs.cp = cp > 0.0 ? cp : p;
        inputs.epsilon = epsilon;
        inputs.n = n;
        inputs.c_global = c_global;
        const DiscreteMeasure mu = measures::load_csv(support_mu);
        const DiscreteMeasure nu = measures::load_csv(support_nu);
        const BoundBreakdown breakdown =
            bounds::theorem1_bound(inputs, mu.points, nu.points);
        std::printf("%-16s %s\n", "component", "value");
        std::printf("%-16s %.12g\n", "r_mu", breakdown.r_mu);
        std::printf("%-16s %.12g\n", "r_nu", breakdown.r_nu);
        std::printf("%-16s %.12g\n", "moment_term", breakdown.moment_term);
        std::printf("%-16s %.12g\n", "covering_term", breakdown.covering_term);
        std::printf("%-16s %zu,%zu\n", "covering_counts", breakdown.covering_counts.first,
                    breakdown.covering_counts.second);
        std::printf("%-16s %.12g\n", "total", breakdown.total);
        if (!output.empty())
            write_text(output, bounds::to_json(breakdown).dump(2) + "\n");
        return 0;
    }

    static const std::map<std::string, CorollaryKind> kinds{
        {"subgaussian", CorollaryKind::subgaussian},
        {"subgaussian_p2", CorollaryKind::subgaussian_p2},
        {"nu_compact", CorollaryKind::nu_compact},
        {"semidiscrete", CorollaryKind::semidiscrete},
        {"manifold", CorollaryKind::manifold}};
    const auto it = kinds.find(kind);
    if (it == kinds.end()) throw std::runtime_error("unknown bound kind " + kind);

    std::optional<DiscreteMeasure> nu;
    if (!support_nu.empty()) nu = measures::load_csv(support_nu);
    std::optional<TailProfile> profile;
    if (!mu_profile.empty()) profile = parse_profile(mu_profile);
    const double value = bounds::corollary_bound(it->second, params, nu, profile);
    std::printf("%-16s %.12g\n", kind.c_str(), value);
    if (!output.empty()) {
        nlohmann::json j{{"kind", kind}, {"value", value}};
        write_text(output, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_cover(const std::string& points_path, double delta, const std::string& output) {
    const DiscreteMeasure m = measures::load_csv(points_path);
    const CoverResult cover = covering::greedy_cover(m.points, delta);
    std::printf("points %zu\n", m.points.size());
    std::printf("delta  %.12g\n", cover.delta);
    std::printf("count  %zu\n", cover.count);
    if (!output.empty()) write_text(output, covering::to_json(cover).dump(2) + "\n");
    return 0;
}

int cmd_check(std::uint64_t seed, const std::string& output) {
    const auto reports = checks::run_all(seed);
    bool all_passed = true;
    std::printf("%-28s %-6s %8s %10s  %s\n", "check", "status", "cases", "worst_gap", "detail");
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : reports) {
        all_passed = all_passed && r.passed;
        std::printf("%-28s %-6s %8zu %10.2e  %s\n", r.name.c_str(),
                    r.passed ? "pass" : "FAIL", r.checked, r.worst_gap, r.detail.c_str());
        doc.push_back(report_to_json(r));
    }
    if (!output.empty()) write_text(output, doc.dump(2) + "\n");
    return all_passed ? 0 : 1;
}

int cmd_experiment(const std::string& config_path, std::optional<std::uint64_t> seed,
                   const std::string& output, const std::string& format, int threads) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open " + config_path);
    nlohmann::json j;
    in >> j;
    ExperimentConfig cfg = harness::config_from_json(j);
    if (seed) cfg.seed = *seed;

    const ExperimentResult result = harness::run_experiment(cfg, threads);

    std::printf("%-8s %-14s %-14s %-14s\n", "n", "mean_error", "std_error", "bound");
    for (const auto& row : result.summary)
        std::printf("%-8lld %-14.6g %-14.6g %-14.6g\n", static_cast<long long>(row.n),
                    row.mean_error, row.std_error, row.bound_value);
    if (result.rate_defined)
        std::printf("rate: slope %.4f intercept %.4f r2 %.4f\n", result.rate.slope,
                    result.rate.intercept, result.rate.r_squared);
    else
        std::printf("rate: undefined (degenerate errors)\n");
    if (!result.failures.empty())
        std::printf("solver failures: %zu\n", result.failures.size());

    if (!output.empty()) {
        harness::export_result(
            result, format == "json" ? harness::ExportFormat::json : harness::ExportFormat::csv,
            output);
        // Plot-ready curve: n, mean error, bound.
        std::string tsv = "n\tmean_error\tbound\n";
        for (const auto& row : result.summary)
            tsv += std::to_string(row.n) + "\t" + format_g17(row.mean_error) + "\t" +
                   format_g17(row.bound_value) + "\n";
        write_text((std::filesystem::path(output) / "curve.tsv").string(), tsv);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropic optimal transport toolbox"};
    app.require_subcommand(1);

    // solve
    std::string mu_path, nu_path, output, format = "json";
    double epsilon = 1.0, p = 2.0, cp = -1.0, tolerance = 1e-12;
    int max_iterations = 200000;
    bool plan_csv = false;
    auto* solve = app.add_subcommand("solve", "solve one instance from CSV marginals");
    solve->add_option("--mu", mu_path)->required();
    solve->add_option("--nu", nu_path)->required();
    solve->add_option("--epsilon", epsilon);
    solve->add_option("--p", p);
    solve->add_option("--cp", cp);
    solve->add_option("--tolerance", tolerance);
    solve->add_option("--max-iterations", max_iterations);
    solve->add_option("--output", output);
    solve->add_option("--format", format);
    solve->add_flag("--plan-csv", plan_csv);

    // bound
    std::string kind = "theorem1", mu_profile, nu_profile, support_mu, support_nu,
                bound_output;
    std::int64_t n = 1024;
    double c_global = 1.0;
    std::vector<std::string> extra;
    auto* bound = app.add_subcommand("bound", "evaluate the finite-sample bound");
    bound->add_option("--kind", kind);
    bound->add_option("--n", n);
    bound->add_option("--epsilon", epsilon);
    bound->add_option("--p", p);
    bound->add_option("--cp", cp);
    bound->add_option("--c-global", c_global);
    bound->add_option("--mu-profile", mu_profile);
    bound->add_option("--nu-profile", nu_profile);
    bound->add_option("--support-mu", support_mu);
    bound->add_option("--support-nu", support_nu);
    bound->add_option("--param", extra);
    bound->add_option("--output", bound_output);

    // cover
    std::string points_path, cover_output;
    double delta = 1.0;
    auto* cover = app.add_subcommand("cover", "covering count of a point file");
    cover->add_option("--points", points_path)->required();
    cover->add_option("--delta", delta)->required();
    cover->add_option("--output", cover_output);

    // check
    std::uint64_t seed = 7;
    std::string check_output;
    auto* check = app.add_subcommand("check", "run all verification sweeps");
    check->add_option("--seed", seed);
    check->add_option("--output", check_output);

    // experiment
    std::string config_path, exp_output, exp_format = "csv";
    std::uint64_t exp_seed = 0;
    bool seed_given = false;
    int threads = 1;
    auto* experiment = app.add_subcommand("experiment", "Monte Carlo error study");
    experiment->add_option("--config", config_path)->required();
    experiment->add_option("--seed", exp_seed)->each([&](const std::string&) {
        seed_given = true;
    });
    experiment->add_option("--output", exp_output);
    experiment->add_option("--format", exp_format);
    experiment->add_option("--threads", threads);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return cmd_solve(mu_path, nu_path, epsilon, p, cp, tolerance, max_iterations,
                             output, format, plan_csv);
        if (bound->parsed())
            return cmd_bound(n, epsilon, p, cp, c_global, mu_profile, nu_profile, support_mu,
                             support_nu, kind, extra, bound_output);
        if (cover->parsed()) return cmd_cover(points_path, delta, cover_output);
        if (check->parsed()) return cmd_check(seed, check_output);
        if (experiment->parsed())
            return cmd_experiment(config_path,
                                  seed_given ? std::optional<std::uint64_t>(exp_seed)
                                             : std::nullopt,
                                  exp_output, exp_format, threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
