#include "storeval/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace storeval {

std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(mix64(seed + 0x9E3779B97F4A7C15ull) ^ mix64(stream + 0x632BE59BD9B4E019ull));
}

double CounterRng::uniform(std::uint64_t counter) const noexcept {
    const std::uint64_t z = mix64(key_ + counter * 0x9E3779B97F4A7C15ull);
    // 53 mantissa bits, offset by half an ulp so 0 and 1 are never returned
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::gaussian(std::uint64_t counter) const {
    return inverse_normal_cdf(uniform(counter));
}

namespace {

// Acklam's rational approximation, then one Halley step against erfc.
double inverse_normal_raw(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p outside (0,1)");
    double x = inverse_normal_raw(p);
    // Halley refinement: cdf(x) computed from erfc is good to full precision.
    static const double inv_sqrt2 = 0.7071067811865475244;
    static const double sqrt_2pi = 2.5066282746310005024;
    const double e = 0.5 * std::erfc(-x * inv_sqrt2) - p;
    const double u = e * sqrt_2pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

}  // namespace storeval
