#include "eotlab/common.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace eotlab {

double kahan_sum(std::span<const double> xs) {
    double sum = 0.0, carry = 0.0;
    for (double x : xs) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

double squared_distance(const Point& a, const Point& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("squared_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

double distance(const Point& a, const Point& b) { return std::sqrt(squared_distance(a, b)); }

double norm(const Point& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

bool lex_less(const Point& a, const Point& b) {
    for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
        if (a[k] < b[k]) return true;
        if (a[k] > b[k]) return false;
    }
    return a.size() < b.size();
}

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace eotlab
