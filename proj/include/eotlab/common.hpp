#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace eotlab {

inline constexpr const char* kVersion = "eotlab 0.1.0";

// A point in R^d.
using Point = std::vector<double>;

// Dense row-major matrix; large enough for transport plans and kernels.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Compensated summation; keeps mass checks accurate for ~1e6 terms.
double kahan_sum(std::span<const double> xs);

double squared_distance(const Point& a, const Point& b);
double distance(const Point& a, const Point& b);
double norm(const Point& a);
bool lex_less(const Point& a, const Point& b);

// 17 significant digits round-trip an IEEE double through decimal text.
std::string format_g17(double x);

}  // namespace eotlab
