#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "eotlab/bounds.hpp"
#include "eotlab/common.hpp"
#include "eotlab/costs.hpp"
#include "eotlab/eot.hpp"
#include "eotlab/measures.hpp"

namespace eotlab {

enum class ReferenceMode { exact_ground_truth, high_m };

// One Monte Carlo study: estimate E|value(mu_n, nu_n) - value(mu, nu)| over
// an n-grid. exact_ground_truth requires discrete-atom samplers, whose
// population value is solvable directly; high_m substitutes an m-sample
// empirical reference with m >= 4 * max(n_grid).
struct ExperimentConfig {
    SamplerSpec sampler_mu;
    SamplerSpec sampler_nu;
    CostSpec cost;
    double epsilon = 1.0;
    std::vector<std::int64_t> n_grid;  // strictly increasing, min >= 4
    int replications = 32;
    std::uint64_t seed = 0;
    ReferenceMode reference = ReferenceMode::exact_ground_truth;
    std::int64_t reference_m = 0;
    SolverConfig solver;               // epsilon field is overridden per run
};

struct CellResult {
    std::int64_t n = 0;
    int replicate = 0;
    double empirical_value = 0.0;
    double reference_value = 0.0;
    double abs_error = 0.0;
};

struct SummaryRow {
    std::int64_t n = 0;
    double mean_error = 0.0;
    double std_error = 0.0;   // standard error of the mean across replications
    double bound_value = 0.0; // NaN when the ground-truth supports are unknown
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

struct ExperimentResult {
    std::vector<CellResult> per_cell;
    std::vector<SummaryRow> summary;
    RateFit rate;
    bool rate_defined = false;
    std::vector<std::string> failures;  // "n=..,replicate=..: reason"
    ExperimentConfig config;            // full echo
    std::string version;
};

namespace harness {

// Deterministic in (config, seed) regardless of thread count: every cell
// derives its own stream from (seed, n-index, replicate, marginal) and cells
// never share state. Failed cells are recorded and skipped, never fatal.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1);

// Ordinary least squares of log(mean_error) on log(n).
RateFit fit_rate(const ExperimentResult& result);

struct BoundComparisonRow {
    std::int64_t n = 0;
    double mean_error = 0.0;
    double bound_value = 0.0;
};

struct BoundComparison {
    std::vector<BoundComparisonRow> per_n;
    double minimal_c_global = 0.0;  // smallest constant making the bound dominate
    double ratio_drift = 0.0;       // max/min of observed-to-bound ratios
};

BoundComparison compare_to_bound(const ExperimentResult& result, const BoundInputs& inputs);

enum class ExportFormat { csv, json };

// csv writes per_cell.csv and summary.csv into the directory; json writes
// result.json. Decimal payloads carry 17 significant digits and re-import
// bit-exactly.
void export_result(const ExperimentResult& result, ExportFormat format,
                   const std::string& directory);
ExperimentResult import_result(ExportFormat format, const std::string& directory);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json result_to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& j);

}  // namespace harness
}  // namespace eotlab
