#include <doctest.h>

#include <cmath>
#include <random>

#include "storeval/common.hpp"
#include "storeval/rng.hpp"
#include "storeval/threading.hpp"

using namespace storeval;

TEST_CASE("linspace endpoints and spacing") {
    const auto g = linspace(0.0, 20.0, 21);
    CHECK(g.size() == 21);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 20.0);
    CHECK(g[7] == doctest::Approx(7.0));
    CHECK(linspace(3.5, 9.0, 1) == std::vector<double>{3.5});
}

TEST_CASE("pairwise sum matches serial sum closely and is chunk independent") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(10001);
    for (auto& x : v) x = u(gen);
    const double s = pairwise_sum(v);
    double serial = 0.0;
    for (double x : v) serial += x;
    CHECK(s == doctest::Approx(serial).epsilon(1e-12));

    const MeanStderr ms = mean_stderr(v);
    CHECK(ms.n == v.size());
    CHECK(ms.mean == doctest::Approx(s / 10001.0));
    CHECK(ms.stderr_ > 0.0);
}

TEST_CASE("inverse normal cdf inverts the cdf") {
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-9}) {
        const double x = inverse_normal_cdf(p);
        const double back = 0.5 * std::erfc(-x / std::sqrt(2.0));
        CHECK(back == doctest::Approx(p).epsilon(1e-11));
    }
    CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::invalid_argument);
    CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::invalid_argument);
}

TEST_CASE("counter rng is a pure function of (seed, stream, counter)") {
    const CounterRng a(42, 3), b(42, 3), c(42, 4);
    CHECK(a.uniform(10) == b.uniform(10));
    CHECK(a.uniform(10) != c.uniform(10));
    CHECK(a.uniform(10) != a.uniform(11));
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const double u = a.uniform(i);
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("parallel_chunks covers the range exactly once") {
    std::vector<int> hits(1000, 0);
    parallel_chunks(hits.size(), 17, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) hits[i] += 1;
    });
    for (int h : hits) CHECK(h == 1);
}
