#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "storeval/process.hpp"

using namespace storeval;

namespace {

JumpDiffusionParams daily_params() {
    JumpDiffusionParams p;
    p.alpha = 0.25 / 365.0;
    p.beta = 2.5;
    p.gamma_vol = 0.2 / std::sqrt(365.0);
    p.lambda_jump = 2.0 / 365.0;
    p.mu_jump = 6.4;
    p.sigma2_jump = 4.0;
    return p;
}

}  // namespace

TEST_CASE("euler step fixed point of the drift") {
    JumpDiffusionParams p;
    p.alpha = 0.25 / 365.0;
    p.beta = 2.5;
    CHECK(euler_step(2.5, p, {0.0, false, 0.0}) == 2.5);
}

TEST_CASE("euler step jump replaces the price") {
    JumpDiffusionParams p;
    CHECK(euler_step(5.0, p, {0.0, true, 3.0}) == 3.0);
}

TEST_CASE("euler step drift arithmetic") {
    JumpDiffusionParams p;
    p.alpha = 0.25 / 365.0;
    p.beta = 2.5;
    CHECK(euler_step(3.0, p, {0.0, false, 0.0}) ==
          doctest::Approx(2.999657534246575).epsilon(1e-15));
}

TEST_CASE("euler step rejects non-finite input") {
    JumpDiffusionParams p;
    CHECK_THROWS_AS(euler_step(std::nan(""), p, {0.0, false, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(euler_step(3.0, p, {std::nan(""), false, 0.0}), std::invalid_argument);
}

TEST_CASE("degenerate dynamics give constant paths") {
    JumpDiffusionParams p;  // alpha = gamma = lambda = 0
    const PathSet ps = simulate_paths(p, 4.2, 10, 7, 99);
    for (std::size_t i = 0; i < ps.n_paths; ++i)
        for (int t = 0; t <= ps.horizon; ++t) CHECK(ps.at(i, t) == 4.2);
}

TEST_CASE("one-step mean matches the closed form within 4 standard errors") {
    const JumpDiffusionParams p = daily_params();
    const double x0 = 5.0;
    const std::size_t n = 100000;
    const PathSet ps = simulate_paths(p, x0, 1, n, 2024);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = ps.at(i, 1);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
    const double se = sd / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean - one_step_mean(p, x0)) <= 4.0 * se);
}

TEST_CASE("identical seeds reproduce bit-exactly, different seeds differ") {
    const JumpDiffusionParams p = daily_params();
    const PathSet a = simulate_paths(p, 3.0, 30, 50, 11);
    const PathSet b = simulate_paths(p, 3.0, 30, 50, 11);
    const PathSet c = simulate_paths(p, 3.0, 30, 50, 12);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
}

TEST_CASE("floor keeps prices from going negative") {
    JumpDiffusionParams p = daily_params();
    p.mu_jump = -50.0;  // jumps drive the raw step negative
    p.lambda_jump = 0.5;
    const PathSet ps = simulate_paths(p, 2.0, 50, 200, 5);
    for (double v : ps.values) CHECK(v >= 0.0);
}

TEST_CASE("lambda dt above one is a configuration error") {
    JumpDiffusionParams p;
    p.lambda_jump = 1.5;
    p.dt = 1.0;
    CHECK_THROWS_AS(simulate_paths(p, 1.0, 2, 2, 1), std::invalid_argument);
}

TEST_CASE("conditional sample") {
    JumpDiffusionParams still;  // all dynamics off
    CHECK(conditional_sample(still, 3.3, 1, 5) == std::vector<double>{3.3});

    const JumpDiffusionParams p = daily_params();
    const std::size_t n = 10000;
    const auto draws = conditional_sample(p, 5.0, n, 123);
    double sum = 0.0, sumsq = 0.0;
    for (double v : draws) {
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
    CHECK(std::abs(mean - one_step_mean(p, 5.0)) <= 4.0 * sd / std::sqrt(static_cast<double>(n)));

    CHECK(conditional_sample(p, 5.0, 16, 7) == conditional_sample(p, 5.0, 16, 7));
    CHECK(conditional_sample(p, 5.0, 16, 7) != conditional_sample(p, 5.0, 16, 8));
}

TEST_CASE("paths csv round trip") {
    const JumpDiffusionParams p = daily_params();
    const PathSet a = simulate_paths(p, 3.0, 5, 4, 77);
    const auto file = std::filesystem::temp_directory_path() / "storeval_paths_test.csv";
    write_paths_csv(a, file);
    const PathSet b = read_paths_csv(file);
    CHECK(b.n_paths == a.n_paths);
    CHECK(b.horizon == a.horizon);
    CHECK(b.seed == a.seed);
    for (std::size_t i = 0; i < a.values.size(); ++i)
        CHECK(b.values[i] == doctest::Approx(a.values[i]).epsilon(1e-11));
    std::filesystem::remove(file);
}
