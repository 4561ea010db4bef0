#include <doctest.h>

#include <cmath>
#include <set>

#include "storeval/gridbasis.hpp"
#include "storeval/rng.hpp"

using namespace storeval;

namespace {

// the six-patch basis used by the year-long storage runs: quadratic cross
// monomials everywhere, cubic price terms on the middle price band
PatchBasis paper_basis() {
    std::vector<Monomial> common = {{0, 0}, {0, 1}, {1, 0}, {0, 2}, {2, 0},
                                    {1, 1}, {1, 2}, {2, 1}, {2, 2}};
    std::map<int, std::vector<Monomial>> extras;
    extras[1] = {{0, 3}, {1, 3}, {2, 3}};
    return PatchBasis::tensor({0.0, 10.0, 20.0}, {0.0, 5.0, 7.0, 14.0}, common, extras);
}

}  // namespace

TEST_CASE("lattice point sets") {
    CHECK(lattice_points(4, 1, 0.0) == std::vector<double>{0.0, 0.25, 0.5, 0.75});
    const auto shifted = lattice_points(4, 1, 0.1);
    const std::vector<double> want{0.1, 0.35, 0.6, 0.85};
    for (std::size_t i = 0; i < 4; ++i) CHECK(shifted[i] == doctest::Approx(want[i]));
    const auto five = lattice_points(5, 2, 0.0);
    const std::vector<double> want5{0.0, 0.4, 0.8, 0.2, 0.6};
    for (std::size_t i = 0; i < 5; ++i) CHECK(five[i] == doctest::Approx(want5[i]));
    CHECK_THROWS_AS(lattice_points(4, 2, 0.0), std::invalid_argument);
}

TEST_CASE("lattice offset-shift equivariance") {
    const auto base = lattice_points(17, 5, 0.0);
    const auto moved = lattice_points(17, 5, 0.37);
    for (std::size_t i = 0; i < base.size(); ++i) {
        double expect = base[i] + 0.37;
        expect -= std::floor(expect);
        CHECK(moved[i] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(moved[i] >= 0.0);
        CHECK(moved[i] < 1.0);
    }
}

TEST_CASE("initial price grid") {
    const GridSegment one{{0.0, 1.0}, 2};
    CHECK(initial_price_grid(std::vector<GridSegment>{one}) == std::vector<double>{0.0, 1.0});

    const GridSegment three{{0.0, 2.0}, 3};
    CHECK(initial_price_grid(std::vector<GridSegment>{three}) ==
          std::vector<double>{0.0, 1.0, 2.0});

    const std::vector<GridSegment> paper = {
        {{0.0, 5.0}, 2500}, {{5.0, 7.0}, 5000}, {{7.0, 12.0}, 2500}};
    const auto grid = initial_price_grid(paper);
    CHECK(grid.size() == 10000);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == 12.0);
    CHECK(grid[1] - grid[0] == doctest::Approx(5.0 / 2499.0));
    CHECK(grid[2501] - grid[2500] == doctest::Approx(2.0 / 4999.0));

    const std::vector<GridSegment> overlapping = {{{0.0, 5.0}, 10}, {{4.0, 7.0}, 10}};
    CHECK_THROWS_AS(initial_price_grid(overlapping), std::invalid_argument);
}

TEST_CASE("yx grid pairs lattice inventories with path prices") {
    JumpDiffusionParams p;
    p.alpha = 0.1;
    p.beta = 5.0;
    const PathSet paths = simulate_paths(p, 3.0, 4, 500, 21);
    const GridYX g = build_yx_grid(paths, 2, 8, {0.0, 20.0}, 99);
    CHECK(g.entries.size() == 4000);
    for (std::size_t i = 0; i < g.entries.size(); ++i) {
        const auto& e = g.entries[i];
        CHECK(e.y >= 0.0);
        CHECK(e.y < 20.0);
        CHECK(e.x == paths.at(e.path_id, 2));  // bit-exact price linkage
        CHECK(e.path_id == i / 8);
    }
}

TEST_CASE("yx grid with unit generator and n_y 1 is an offset equidistant sweep") {
    JumpDiffusionParams p;
    const PathSet paths = simulate_paths(p, 1.0, 2, 10, 1);
    const GridYX g = build_yx_grid(paths, 1, 1, {0.0, 1.0}, 4);
    for (std::size_t i = 1; i < g.entries.size(); ++i) {
        double step = g.entries[i].y - g.entries[i - 1].y;
        if (step < 0.0) step += 1.0;
        CHECK(step == doctest::Approx(0.1).epsilon(1e-9));
    }
}

TEST_CASE("paper basis dimension and evaluation at (1,1)") {
    const PatchBasis b = paper_basis();
    CHECK(b.dim() == 60);
    CHECK(b.patches().size() == 6);

    const auto dense = b.eval_dense(1.0, 1.0);
    const int patch = b.patch_of(1.0, 1.0);
    REQUIRE(patch >= 0);
    const auto& p = b.patches()[patch];
    CHECK(p.monomials.size() == 9);
    int nonzeros = 0;
    for (double v : dense) nonzeros += v != 0.0;
    CHECK(nonzeros == 9);
    for (std::size_t m = 0; m < 9; ++m) CHECK(dense[p.offset + m] == 1.0);
}

TEST_CASE("points outside every patch evaluate to zero") {
    const PatchBasis b = paper_basis();
    for (const auto& [y, x] : std::vector<std::pair<double, double>>{
             {21.0, 3.0}, {-0.1, 3.0}, {5.0, 14.5}, {5.0, -0.1}}) {
        const auto dense = b.eval_dense(y, x);
        for (double v : dense) CHECK(v == 0.0);
        CHECK(b.patch_of(y, x) == -1);
    }
}

TEST_CASE("patch membership is unambiguous on shared edges") {
    const PatchBasis b = paper_basis();
    // y = 10 belongs to the upper-inventory row, x = 7 to the upper band
    const int p1 = b.patch_of(10.0, 3.0);
    CHECK(b.patches()[p1].y.lo == 10.0);
    const int p2 = b.patch_of(3.0, 7.0);
    CHECK(b.patches()[p2].x.lo == 7.0);
    // outer boundary is closed
    CHECK(b.patch_of(20.0, 14.0) >= 0);

    const CounterRng rng(5, 0);
    std::vector<double> local;
    for (int i = 0; i < 500; ++i) {
        const double y = 22.0 * rng.uniform(2 * i) - 1.0;
        const double x = 15.0 * rng.uniform(2 * i + 1) - 0.5;
        int count = 0;
        for (const auto& p : b.patches()) {
            const bool in_y = y >= p.y.lo && (y < p.y.hi || (p.y_closed_hi && y == p.y.hi));
            const bool in_x = x >= p.x.lo && (x < p.x.hi || (p.x_closed_hi && x == p.x.hi));
            count += in_y && in_x;
        }
        CHECK(count <= 1);
        CHECK(count == (b.patch_of(y, x) >= 0 ? 1 : 0));
    }
}

TEST_CASE("y-cell basis evaluates interval cubics") {
    const PatchBasis phi = PatchBasis::y_cells({0.0, 7.0, 14.0, 20.0}, 3);
    CHECK(phi.dim() == 12);

    std::vector<double> local;
    int patch = phi.eval_local(0.0, 0.0, local);
    CHECK(patch == 0);
    CHECK(local == std::vector<double>{1.0, 0.0, 0.0, 0.0});

    // the shared edge belongs to the upper interval
    patch = phi.eval_local(7.0, 0.0, local);
    CHECK(patch == 1);
    CHECK(local == std::vector<double>{1.0, 7.0, 49.0, 343.0});

    patch = phi.eval_local(21.0, 0.0, local);
    CHECK(patch == -1);
}

TEST_CASE("y-sections agree with dense evaluation") {
    const PatchBasis b = paper_basis();
    std::vector<double> coeffs(b.dim());
    const CounterRng rng(9, 1);
    for (int q = 0; q < b.dim(); ++q) coeffs[q] = rng.uniform(q) - 0.5;

    for (double x : {0.5, 5.0, 6.9, 7.0, 13.0, 14.0}) {
        const YSection s = y_section(b, coeffs, x);
        for (double y : {0.0, 1.0, 9.99, 10.0, 15.5, 20.0, 20.5}) {
            const auto dense = b.eval_dense(y, x);
            double direct = 0.0;
            for (int q = 0; q < b.dim(); ++q) direct += coeffs[q] * dense[q];
            CHECK(s(y) == doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("mixture section equals the average of plain sections") {
    const PatchBasis b = paper_basis();
    std::vector<double> coeffs(b.dim());
    const CounterRng rng(10, 2);
    for (int q = 0; q < b.dim(); ++q) coeffs[q] = 2.0 * rng.uniform(q) - 1.0;

    std::vector<double> xs;
    for (int i = 0; i < 33; ++i) xs.push_back(14.5 * rng.uniform(1000 + i));
    const YSection mix = y_section_mixture(b, coeffs, xs);
    for (double y : {0.0, 3.3, 10.0, 19.0}) {
        double avg = 0.0;
        for (double x : xs) avg += y_section(b, coeffs, x)(y);
        avg /= static_cast<double>(xs.size());
        CHECK(mix(y) == doctest::Approx(avg).epsilon(1e-12));
    }
}
