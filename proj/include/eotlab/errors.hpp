#pragma once

#include <stdexcept>
#include <string>

namespace eotlab {

// Restriction to a ball that contains none of the measure's atoms.
struct NoMassInBall : std::runtime_error {
    explicit NoMassInBall(const std::string& what) : std::runtime_error(what) {}
};

// Cost evaluations produced a non-finite kernel entry.
struct NonFiniteKernel : std::runtime_error {
    explicit NonFiniteKernel(const std::string& what) : std::runtime_error(what) {}
};

// A plan puts mass where the product of the marginals has none.
struct AbsoluteContinuityViolation : std::runtime_error {
    explicit AbsoluteContinuityViolation(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside the validity region of an inequality check.
struct DomainViolation : std::runtime_error {
    explicit DomainViolation(const std::string& what) : std::runtime_error(what) {}
};

// Log-log regression attempted on degenerate data (zero errors or too few points).
struct DegenerateFit : std::runtime_error {
    explicit DegenerateFit(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace eotlab
