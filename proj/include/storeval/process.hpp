#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "storeval/common.hpp"

namespace storeval {

/// Mean-reverting jump diffusion on a daily grid,
///   x' = x + alpha (beta - x) dt + gamma_vol x sqrt(dt) Z + (J - x) 1{jump},
/// with jumps arriving with probability lambda_jump * dt per step and jump
/// levels J ~ Normal(mu_jump, sigma2_jump). Prices are floored after each
/// step; the stated SDE can otherwise go negative through a jump draw.
struct JumpDiffusionParams {
    double alpha = 0.0;        // mean-reversion speed per day
    double beta = 0.0;         // long-run level ($/MMBtu)
    double gamma_vol = 0.0;    // proportional volatility per sqrt(day)
    double lambda_jump = 0.0;  // jump intensity per day
    double mu_jump = 0.0;      // jump-size mean ($/MMBtu); no sensible default, always set
    double sigma2_jump = 0.0;  // jump-size variance
    double dt = 1.0;           // time step (days)
    double floor = 0.0;        // minimum admissible price

    void validate() const;
};

/// N simulated trajectories on the day grid 0..horizon. Path i draws from the
/// counter-based substream (seed, stream_ids[i]), so values are reproducible
/// bit-exactly regardless of scheduling.
struct PathSet {
    int horizon = 0;  // T: last day index
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> stream_ids;  // per-path substream identifiers
    std::vector<double> values;             // row-major [path][t], n_paths x (horizon+1)

    double at(std::size_t path, int t) const { return values[path * (horizon + 1) + t]; }
    double x0(std::size_t path) const { return at(path, 0); }
};

struct EulerShocks {
    double gaussian = 0.0;
    bool jump = false;
    double jump_level = 0.0;
};

/// One Euler step from x given explicit shocks. Deterministic in its inputs.
double euler_step(double x, const JumpDiffusionParams& p, const EulerShocks& shocks);

/// Paths all started at x0. Optional x0_overrides starts path i at
/// x0_overrides[i] instead (used to launch one path per initial-price grid
/// point); it must then have exactly n entries.
PathSet simulate_paths(const JumpDiffusionParams& p, double x0, int horizon, std::size_t n,
                       std::uint64_t seed, const std::vector<double>* x0_overrides = nullptr);

/// L independent one-step transitions from x; the conditional sample feeding
/// the nested continuation estimate.
std::vector<double> conditional_sample(const JumpDiffusionParams& p, double x, std::size_t count,
                                       std::uint64_t seed);

/// Exact mean of one Euler step when the floor never binds.
double one_step_mean(const JumpDiffusionParams& p, double x);

void write_paths_csv(const PathSet& paths, const std::filesystem::path& file,
                     const std::vector<std::string>& extra_comments = {});
PathSet read_paths_csv(const std::filesystem::path& file);

}  // namespace storeval
