#include "eotlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "eotlab/errors.hpp"
#include "eotlab/rng.hpp"

namespace eotlab::harness {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void validate(const ExperimentConfig& cfg) {
    if (cfg.n_grid.empty()) throw std::invalid_argument("experiment: empty n_grid");
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        if (cfg.n_grid[i] < 4)
            throw std::invalid_argument("experiment: n_grid entries must be >= 4");
        if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1])
            throw std::invalid_argument("experiment: n_grid must be strictly increasing");
    }
    if (cfg.replications < 1)
        throw std::invalid_argument("experiment: replications must be >= 1");
    if (cfg.reference == ReferenceMode::high_m &&
        cfg.reference_m < 4 * cfg.n_grid.back())
        throw std::invalid_argument("experiment: high_m reference needs m >= 4 max(n_grid)");
    if (cfg.reference == ReferenceMode::exact_ground_truth &&
        (!cfg.sampler_mu.atoms || !cfg.sampler_nu.atoms))
        throw std::invalid_argument(
            "experiment: exact_ground_truth needs discrete-atom samplers");
}

// Stream path tags keep sampling, reference, and cell draws disjoint.
constexpr std::uint64_t kTagReference = 0;
constexpr std::uint64_t kTagCell = 1;

DiscreteMeasure reference_measure(const SamplerSpec& spec, const ExperimentConfig& cfg,
                                  std::uint64_t marginal) {
    if (cfg.reference == ReferenceMode::exact_ground_truth)
        return collapse_duplicates(*spec.atoms);
    const auto pts = measures::sample(
        spec, static_cast<std::size_t>(cfg.reference_m),
        rng::derive_stream(cfg.seed, {kTagReference, marginal}));
    return collapse_duplicates(measures::empirical(pts));
}

double solve_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   const ExperimentConfig& cfg) {
    SolverConfig solver = cfg.solver;
    solver.epsilon = cfg.epsilon;
    return eot::solve(mu, nu, cfg.cost, solver).value;
}

std::string reference_name(ReferenceMode mode) {
    return mode == ReferenceMode::exact_ground_truth ? "exact_ground_truth" : "high_m";
}

ReferenceMode reference_from_name(const std::string& name) {
    if (name == "exact_ground_truth") return ReferenceMode::exact_ground_truth;
    if (name == "high_m") return ReferenceMode::high_m;
    throw std::invalid_argument("experiment: unknown reference mode " + name);
}

double json_double(const nlohmann::json& j) {
    return j.is_null() ? kNan : j.get<double>();
}

nlohmann::json double_json(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
    validate(cfg);
    if (threads < 1) threads = 1;

    ExperimentResult result;
    result.config = cfg;
    result.version = kVersion;

    const DiscreteMeasure ref_mu = reference_measure(cfg.sampler_mu, cfg, 0);
    const DiscreteMeasure ref_nu = reference_measure(cfg.sampler_nu, cfg, 1);
    const double reference_value = solve_value(ref_mu, ref_nu, cfg);

    const std::size_t cells = cfg.n_grid.size() * static_cast<std::size_t>(cfg.replications);
    std::vector<CellResult> table(cells);
    std::vector<char> ok(cells, 0);
    std::vector<std::string> errors(cells);

    auto run_cell = [&](std::size_t idx) {
        const std::size_t n_index = idx / static_cast<std::size_t>(cfg.replications);
        const int replicate = static_cast<int>(idx % static_cast<std::size_t>(cfg.replications));
        const std::int64_t n = cfg.n_grid[n_index];
        CellResult cell;
        cell.n = n;
        cell.replicate = replicate;
        cell.reference_value = reference_value;
        try {
            const auto xs = measures::sample(
                cfg.sampler_mu, static_cast<std::size_t>(n),
                rng::derive_stream(cfg.seed, {kTagCell, n_index,
                                              static_cast<std::uint64_t>(replicate), 0}));
            const auto ys = measures::sample(
                cfg.sampler_nu, static_cast<std::size_t>(n),
                rng::derive_stream(cfg.seed, {kTagCell, n_index,
                                              static_cast<std::uint64_t>(replicate), 1}));
            // Exact-duplicate atoms merge without changing the transport value;
            // categorical samples shrink to at most the ground-truth support.
            const DiscreteMeasure mu_n = collapse_duplicates(measures::empirical(xs));
            const DiscreteMeasure nu_n = collapse_duplicates(measures::empirical(ys));
            cell.empirical_value = solve_value(mu_n, nu_n, cfg);
            cell.abs_error = std::abs(cell.empirical_value - cell.reference_value);
            table[idx] = cell;
            ok[idx] = 1;
        } catch (const std::exception& e) {
            errors[idx] = "n=" + std::to_string(n) + ",replicate=" +
                          std::to_string(replicate) + ": " + e.what();
        }
    };

    if (threads == 1) {
        for (std::size_t idx = 0; idx < cells; ++idx) run_cell(idx);
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&]() {
                while (true) {
                    const std::size_t idx = cursor.fetch_add(1);
                    if (idx >= cells) return;
                    run_cell(idx);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t idx = 0; idx < cells; ++idx) {
        if (ok[idx])
            result.per_cell.push_back(table[idx]);
        else
            result.failures.push_back(errors[idx]);
    }

    const bool has_supports = cfg.sampler_mu.atoms && cfg.sampler_nu.atoms;
    for (std::size_t n_index = 0; n_index < cfg.n_grid.size(); ++n_index) {
        const std::int64_t n = cfg.n_grid[n_index];
        std::vector<double> errs;
        for (const auto& cell : result.per_cell)
            if (cell.n == n) errs.push_back(cell.abs_error);
        SummaryRow row;
        row.n = n;
        row.bound_value = kNan;
        if (!errs.empty()) {
            row.mean_error = kahan_sum(errs) / static_cast<double>(errs.size());
            if (errs.size() >= 2) {
                std::vector<double> sq(errs.size());
                for (std::size_t i = 0; i < errs.size(); ++i) {
                    const double d = errs[i] - row.mean_error;
                    sq[i] = d * d;
                }
                const double var = kahan_sum(sq) / static_cast<double>(errs.size() - 1);
                row.std_error = std::sqrt(var / static_cast<double>(errs.size()));
            }
        }
        if (has_supports) {
            BoundInputs inputs;
            inputs.profile_mu = cfg.sampler_mu.profile;
            inputs.profile_nu = cfg.sampler_nu.profile;
            inputs.p = cfg.cost.p;
            inputs.cp = cfg.cost.cp;
            inputs.epsilon = cfg.epsilon;
            inputs.n = n;
            row.bound_value = bounds::theorem1_bound(inputs, cfg.sampler_mu.atoms->points,
                                                     cfg.sampler_nu.atoms->points)
                                  .total;
        }
        result.summary.push_back(row);
    }

    try {
        result.rate = fit_rate(result);
        result.rate_defined = true;
    } catch (const DegenerateFit&) {
        result.rate_defined = false;
    }
    return result;
}

RateFit fit_rate(const ExperimentResult& result) {
    std::vector<double> lx, ly;
    for (const auto& row : result.summary) {
        if (row.mean_error == 0.0)
            throw DegenerateFit("fit_rate: zero mean error at n=" + std::to_string(row.n));
        if (row.mean_error < 0.0 || std::isnan(row.mean_error))
            throw DegenerateFit("fit_rate: invalid mean error");
        lx.push_back(std::log(static_cast<double>(row.n)));
        ly.push_back(std::log(row.mean_error));
    }
    if (lx.size() < 3) throw DegenerateFit("fit_rate: need at least 3 grid points");

    const double n = static_cast<double>(lx.size());
    const double mx = kahan_sum(lx) / n;
    const double my = kahan_sum(ly) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

BoundComparison compare_to_bound(const ExperimentResult& result, const BoundInputs& inputs) {
    const auto& cfg = result.config;
    if (!cfg.sampler_mu.atoms || !cfg.sampler_nu.atoms)
        throw std::invalid_argument("compare_to_bound: ground-truth supports unavailable");

    BoundComparison cmp;
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    for (const auto& row : result.summary) {
        BoundInputs per_n = inputs;
        per_n.n = row.n;
        per_n.c_global = 1.0;
        const double base = bounds::theorem1_bound(per_n, cfg.sampler_mu.atoms->points,
                                                   cfg.sampler_nu.atoms->points)
                                .total;
        cmp.per_n.push_back({row.n, row.mean_error, inputs.c_global * base});
        if (base > 0.0) {
            const double ratio = row.mean_error / base;
            cmp.minimal_c_global = std::max(cmp.minimal_c_global, ratio);
            if (row.mean_error > 0.0) {
                min_ratio = std::min(min_ratio, ratio);
                max_ratio = std::max(max_ratio, ratio);
            }
        }
    }
    cmp.ratio_drift = (max_ratio > 0.0 && std::isfinite(min_ratio) && min_ratio > 0.0)
                          ? max_ratio / min_ratio
                          : 0.0;
    return cmp;
}

namespace {

void write_per_cell_csv(const ExperimentResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export: cannot open " + path);
    out << "n,replicate,empirical_value,reference_value,abs_error\n";
    for (const auto& cell : result.per_cell)
        out << cell.n << ',' << cell.replicate << ',' << format_g17(cell.empirical_value)
            << ',' << format_g17(cell.reference_value) << ',' << format_g17(cell.abs_error)
            << '\n';
    if (!out) throw std::runtime_error("export: write failed for " + path);
}

void write_summary_csv(const ExperimentResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export: cannot open " + path);
    out << "n,mean_error,std_error,bound_value\n";
    for (const auto& row : result.summary)
        out << row.n << ',' << format_g17(row.mean_error) << ',' << format_g17(row.std_error)
            << ',' << format_g17(row.bound_value) << '\n';
    if (!out) throw std::runtime_error("export: write failed for " + path);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import: cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

void export_result(const ExperimentResult& result, ExportFormat format,
                   const std::string& directory) {
    std::filesystem::create_directories(directory);
    const std::filesystem::path dir(directory);
    if (format == ExportFormat::csv) {
        write_per_cell_csv(result, (dir / "per_cell.csv").string());
        write_summary_csv(result, (dir / "summary.csv").string());
        return;
    }
    std::ofstream out(dir / "result.json");
    if (!out) throw std::runtime_error("export: cannot open " + (dir / "result.json").string());
    out << result_to_json(result).dump(2) << '\n';
    if (!out) throw std::runtime_error("export: write failed for result.json");
}

ExperimentResult import_result(ExportFormat format, const std::string& directory) {
    const std::filesystem::path dir(directory);
    if (format == ExportFormat::json) {
        std::ifstream in(dir / "result.json");
        if (!in)
            throw std::runtime_error("import: cannot open " + (dir / "result.json").string());
        nlohmann::json j;
        in >> j;
        return result_from_json(j);
    }
    ExperimentResult result;
    const auto cells = read_csv((dir / "per_cell.csv").string());
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const auto& row = cells[i];
        if (row.size() != 5) throw std::runtime_error("import: malformed per_cell.csv row");
        result.per_cell.push_back({std::stoll(row[0]), std::stoi(row[1]), std::stod(row[2]),
                                   std::stod(row[3]), std::stod(row[4])});
    }
    const auto summary = read_csv((dir / "summary.csv").string());
    for (std::size_t i = 1; i < summary.size(); ++i) {
        const auto& row = summary[i];
        if (row.size() != 4) throw std::runtime_error("import: malformed summary.csv row");
        result.summary.push_back(
            {std::stoll(row[0]), std::stod(row[1]), std::stod(row[2]), std::stod(row[3])});
    }
    result.version = kVersion;
    return result;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    return nlohmann::json{
        {"sampler_mu", measures::sampler_to_json(cfg.sampler_mu)},
        {"sampler_nu", measures::sampler_to_json(cfg.sampler_nu)},
        {"cost", costs::to_json(cfg.cost)},
        {"epsilon", cfg.epsilon},
        {"n_grid", cfg.n_grid},
        {"replications", cfg.replications},
        {"seed", cfg.seed},
        {"reference", reference_name(cfg.reference)},
        {"reference_m", cfg.reference_m},
        {"solver",
         {{"tolerance", cfg.solver.tolerance}, {"max_iterations", cfg.solver.max_iterations}}}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.sampler_mu = measures::sampler_from_json(j.at("sampler_mu"));
    cfg.sampler_nu = measures::sampler_from_json(j.at("sampler_nu"));
    cfg.cost = costs::cost_from_json(j.at("cost"));
    cfg.epsilon = j.at("epsilon").get<double>();
    cfg.n_grid = j.at("n_grid").get<std::vector<std::int64_t>>();
    cfg.replications = j.at("replications").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.reference = reference_from_name(j.at("reference").get<std::string>());
    cfg.reference_m = j.value("reference_m", std::int64_t{0});
    if (j.contains("solver")) {
        cfg.solver.tolerance = j.at("solver").value("tolerance", 1e-12);
        cfg.solver.max_iterations = j.at("solver").value("max_iterations", 200000);
    }
    return cfg;
}

nlohmann::json result_to_json(const ExperimentResult& result) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : result.per_cell)
        cells.push_back({{"n", cell.n},
                         {"replicate", cell.replicate},
                         {"empirical_value", cell.empirical_value},
                         {"reference_value", cell.reference_value},
                         {"abs_error", cell.abs_error}});
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& row : result.summary)
        summary.push_back({{"n", row.n},
                           {"mean_error", row.mean_error},
                           {"std_error", row.std_error},
                           {"bound_value", double_json(row.bound_value)}});
    return nlohmann::json{{"version", result.version},
                          {"config", config_to_json(result.config)},
                          {"per_cell", cells},
                          {"summary", summary},
                          {"rate",
                           {{"slope", result.rate.slope},
                            {"intercept", result.rate.intercept},
                            {"r_squared", result.rate.r_squared}}},
                          {"rate_defined", result.rate_defined},
                          {"failures", result.failures}};
}

ExperimentResult result_from_json(const nlohmann::json& j) {
    ExperimentResult result;
    result.version = j.at("version").get<std::string>();
    result.config = config_from_json(j.at("config"));
    for (const auto& cell : j.at("per_cell"))
        result.per_cell.push_back({cell.at("n").get<std::int64_t>(),
                                   cell.at("replicate").get<int>(),
                                   cell.at("empirical_value").get<double>(),
                                   cell.at("reference_value").get<double>(),
                                   cell.at("abs_error").get<double>()});
    for (const auto& row : j.at("summary"))
        result.summary.push_back({row.at("n").get<std::int64_t>(),
                                  row.at("mean_error").get<double>(),
                                  row.at("std_error").get<double>(),
                                  json_double(row.at("bound_value"))});
    result.rate.slope = j.at("rate").at("slope").get<double>();
    result.rate.intercept = j.at("rate").at("intercept").get<double>();
    result.rate.r_squared = j.at("rate").at("r_squared").get<double>();
    result.rate_defined = j.at("rate_defined").get<bool>();
    result.failures = j.at("failures").get<std::vector<std::string>>();
    return result;
}

}  // namespace eotlab::harness
