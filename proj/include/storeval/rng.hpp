#pragma once

#include <cstdint>

namespace storeval {

/// splitmix64 finalizer; bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Key for an independent substream identified by (seed, stream).
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Inverse of the standard normal CDF, accurate to ~1e-15 over (0, 1).
double inverse_normal_cdf(double p);

/// Counter-based generator: every draw is a pure function of (seed, stream,
/// counter), so consumers can be evaluated in any order or in parallel and
/// still reproduce the same values.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(stream_key(seed, stream)) {}

    /// Uniform draw in the open interval (0, 1).
    double uniform(std::uint64_t counter) const noexcept;

    /// Standard normal draw (inverse-CDF transform of uniform()).
    double gaussian(std::uint64_t counter) const;

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
};

}  // namespace storeval
