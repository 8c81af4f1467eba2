#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "eotlab/check_report.hpp"

namespace eotlab::checks {

// Runs every closed-form inequality and solver identity sweep at desk scale:
// cost envelopes, gamma-family bounds, binomial sums, truncation radii,
// scaling identity, duality gap, potential bounds, density norms, truncation
// and stability comparisons against the exact transport oracle.
std::vector<CheckReport> run_all(std::uint64_t seed);

}  // namespace eotlab::checks

namespace eotlab {
nlohmann::json report_to_json(const CheckReport& r);
}
