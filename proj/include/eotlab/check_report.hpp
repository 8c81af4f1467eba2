#pragma once

#include <limits>
#include <string>

#include <json.hpp>

namespace eotlab {

// Outcome of an inequality sweep. worst_gap is the largest observed
// lhs - rhs - slack; any positive gap counts as a violation.
struct CheckReport {
    std::string name;
    bool passed = true;
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst_gap = -std::numeric_limits<double>::infinity();
    std::string detail;

    void note(double gap, const std::string& what) {
        ++checked;
        if (gap > worst_gap) worst_gap = gap;
        if (gap > 0.0) {
            ++violations;
            passed = false;
            if (detail.empty()) detail = what;
        }
    }
};

nlohmann::json report_to_json(const CheckReport& r);

}  // namespace eotlab
