#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace storeval {

/// Closed interval [lo, hi]. Empty when lo > hi.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    bool empty() const { return lo > hi; }
    double width() const { return hi - lo; }
    double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
};

/// n equidistant points on [lo, hi] including both endpoints (n >= 2),
/// or the single point lo when n == 1.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Sum with a fixed pairwise reduction tree. The result depends only on the
/// order of the input values, never on threading or chunk sizes.
double pairwise_sum(std::span<const double> values);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;  // sample stdev / sqrt(n)
    std::size_t n = 0;
};

MeanStderr mean_stderr(std::span<const double> values);

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace storeval
