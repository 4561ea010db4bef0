#include "storeval/common.hpp"

#include <algorithm>

namespace storeval {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    require(n >= 1, "linspace: need at least one point");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
    out[n - 1] = hi;
    return out;
}

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n <= 16) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MeanStderr mean_stderr(std::span<const double> values) {
    MeanStderr r;
    r.n = values.size();
    if (r.n == 0) return r;
    r.mean = pairwise_sum(values) / static_cast<double>(r.n);
    if (r.n == 1) return r;
    std::vector<double> sq(r.n);
    for (std::size_t i = 0; i < r.n; ++i) {
        const double d = values[i] - r.mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(r.n - 1);
    r.stderr_ = std::sqrt(var / static_cast<double>(r.n));
    return r;
}

}  // namespace storeval
