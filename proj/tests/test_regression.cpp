#include <doctest.h>

#include <cmath>

#include "storeval/regression.hpp"
#include "storeval/rng.hpp"
#include "storeval/threading.hpp"

using namespace storeval;

namespace {

std::shared_ptr<const PatchBasis> two_patch_linear() {
    // two inventory cells, one price band, affine in y per cell
    return std::make_shared<const PatchBasis>(
        PatchBasis::tensor({0.0, 10.0, 20.0}, {0.0, 100.0}, {{0, 0}, {1, 0}}));
}

}  // namespace

TEST_CASE("dense normal equations: single and averaged samples") {
    NormalEquations ne(3);
    ne.add_features(std::vector<double>{1.0, 0.0, 0.0}, 5.0);
    CHECK(ne.gram_dense() ==
          std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
    CHECK(ne.moment_dense() == std::vector<double>{5.0, 0.0, 0.0});

    ne.add_features(std::vector<double>{0.0, 1.0, 0.0}, 1.0);
    // averages over two samples
    CHECK(ne.gram_dense()[0] == 0.5);
    CHECK(ne.gram_dense()[4] == 0.5);
    CHECK(ne.moment_dense() == std::vector<double>{2.5, 0.5, 0.0});
}

TEST_CASE("solve: identity gram, pure ridge limit, singular flagging") {
    NormalEquations ne(2);
    ne.add_features(std::vector<double>{1.0, 0.0}, 2.0);
    ne.add_features(std::vector<double>{0.0, 1.0}, -3.0);
    SolveInfo info;
    auto c = solve(ne, {0.0}, &info);
    CHECK(c[0] == doctest::Approx(4.0));  // gram = I/2, moment = (1, -1.5)
    CHECK(c[1] == doctest::Approx(-6.0));
    CHECK(!info.rank_deficient);

    NormalEquations zero(2);
    zero.add_features(std::vector<double>{0.0, 0.0}, 1.0);
    auto pure = solve(zero, {1.0}, &info);
    CHECK(pure == std::vector<double>{0.0, 0.0});
    CHECK(info.rank_deficient);

    // gram 0 with ridge 1: coefficients equal the moment vector
    NormalEquations ridge_only(2);
    ridge_only.add_features(std::vector<double>{0.0, 0.0}, 1.0);
    // hand-build a nonzero moment through a feature vector of zeros is not
    // possible, so check the identity on a rank-1 system instead
    NormalEquations rank1(2);
    rank1.add_features(std::vector<double>{1.0, 1.0}, 1.0);
    auto min_norm = solve(rank1, {0.0}, &info);
    CHECK(info.rank_deficient);
    // minimum-norm solution of the consistent system splits the weight
    CHECK(min_norm[0] == doctest::Approx(0.5));
    CHECK(min_norm[1] == doctest::Approx(0.5));
}

TEST_CASE("patchwise assembly is block diagonal and blocks solve independently") {
    auto basis = two_patch_linear();
    std::vector<RegSample> samples;
    const CounterRng rng(3, 0);
    for (int i = 0; i < 200; ++i) {
        const double y = 20.0 * rng.uniform(2 * i);
        const double x = 50.0;
        // exact patchwise-affine target
        const double target = y < 10.0 ? 2.0 + 3.0 * y : -1.0 + 0.5 * y;
        samples.push_back({y, x, target});
    }
    const NormalEquations ne = assemble(basis, samples);
    CHECK(ne.n_samples() == 200);

    const auto gram = ne.gram_dense();
    const int q = ne.dim();
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) {
            if ((i < 2) != (j < 2)) CHECK(std::abs(gram[i * q + j]) <= 1e-10);
            CHECK(gram[i * q + j] == gram[j * q + i]);
        }

    SolveInfo info;
    const auto coeffs = solve(ne, {0.0}, &info);
    CHECK(coeffs[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(coeffs[1] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(coeffs[2] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(coeffs[3] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("exact polynomial recovery within 1e-8 relative error") {
    auto basis = std::make_shared<const PatchBasis>(PatchBasis::tensor(
        {0.0, 10.0, 20.0}, {0.0, 5.0, 14.0},
        {{0, 0}, {0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 1}, {1, 2}, {2, 1}, {2, 2}}));
    std::vector<double> truth(basis->dim());
    const CounterRng rng(8, 1);
    for (int qi = 0; qi < basis->dim(); ++qi) truth[qi] = 2.0 * rng.uniform(qi) - 1.0;
    const Surface truth_surface{basis, truth};

    std::vector<RegSample> samples;
    for (int i = 0; i < 4000; ++i) {
        const double y = 20.0 * rng.uniform(10000 + 2 * i);
        const double x = 14.0 * rng.uniform(10000 + 2 * i + 1);
        samples.push_back({y, x, truth_surface.eval(y, x)});
    }
    const FitResult fit = fit_surface(basis, samples);
    for (int qi = 0; qi < basis->dim(); ++qi)
        CHECK(fit.surface.coeffs[qi] ==
              doctest::Approx(truth[qi]).epsilon(1e-8));
    CHECK(fit.max_abs_residual <= 1e-8);
}

TEST_CASE("projection residual is orthogonal to the feature span") {
    auto basis = two_patch_linear();
    std::vector<RegSample> samples;
    const CounterRng rng(12, 0);
    for (int i = 0; i < 300; ++i) {
        const double y = 20.0 * rng.uniform(3 * i);
        samples.push_back({y, 1.0, std::sin(y) + 0.1 * rng.uniform(3 * i + 1)});
    }
    const FitResult fit = fit_surface(basis, samples, {0.0});
    std::vector<double> inner(basis->dim(), 0.0);
    double scale = 0.0;
    for (const auto& s : samples) {
        const auto f = basis->eval_dense(s.y, s.x);
        const double resid = s.target - fit.surface.eval(s.y, s.x);
        for (int qi = 0; qi < basis->dim(); ++qi) inner[qi] += f[qi] * resid;
        scale = std::max(scale, std::abs(s.target));
    }
    for (double v : inner) CHECK(std::abs(v / samples.size()) <= 1e-8 * std::max(1.0, scale));
}

TEST_CASE("fit_surface degenerate inputs") {
    auto basis = two_patch_linear();
    std::vector<RegSample> zeros;
    for (int i = 0; i < 50; ++i) zeros.push_back({0.4 * i, 1.0, 0.0});
    const FitResult z = fit_surface(basis, zeros);
    for (double c : z.surface.coeffs) CHECK(c == 0.0);

    // affine target on one patch only: per-patch coefficients recovered, the
    // unsampled patch is flagged and zeroed by the ridge
    std::vector<RegSample> one_patch;
    for (int i = 0; i < 40; ++i) {
        const double y = 0.25 * i;  // stays below 10
        one_patch.push_back({y, 1.0, 2.0 + 3.0 * y});
    }
    const FitResult f = fit_surface(basis, one_patch);
    CHECK(f.surface.coeffs[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(f.surface.coeffs[1] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(f.info.rank_deficient);
    CHECK(f.surface.coeffs[2] == 0.0);
    CHECK(f.surface.coeffs[3] == 0.0);

    // every point outside the patches: all-zero features, flagged
    std::vector<RegSample> outside;
    for (int i = 0; i < 10; ++i) outside.push_back({30.0 + i, 1.0, 1.0});
    const FitResult o = fit_surface(basis, outside);
    CHECK(o.info.rank_deficient);
    for (double c : o.surface.coeffs) CHECK(c == 0.0);

    CHECK_THROWS_AS(fit_surface(basis, std::vector<RegSample>{}), std::invalid_argument);
}

TEST_CASE("assembly is bit-identical across worker counts") {
    auto basis = two_patch_linear();
    std::vector<RegSample> samples;
    const CounterRng rng(77, 0);
    for (int i = 0; i < 30000; ++i)
        samples.push_back({20.0 * rng.uniform(2 * i), 1.0, rng.uniform(2 * i + 1)});

    set_thread_count(1);
    const NormalEquations serial = assemble(basis, samples);
    set_thread_count(4);
    const NormalEquations parallel = assemble(basis, samples);
    set_thread_count(0);
    CHECK(serial.gram_dense() == parallel.gram_dense());
    CHECK(serial.moment_dense() == parallel.moment_dense());
}

TEST_CASE("block solve equals whole-matrix solve") {
    auto basis = two_patch_linear();
    std::vector<RegSample> samples;
    const CounterRng rng(5, 5);
    for (int i = 0; i < 500; ++i) {
        const double y = 20.0 * rng.uniform(2 * i);
        samples.push_back({y, 1.0, std::cos(y)});
    }
    const NormalEquations ne = assemble(basis, samples);
    const auto block_solution = solve(ne, {0.0});

    // dense route: solve the full Q x Q system with plain Gaussian steps
    const int q = ne.dim();
    auto a = ne.gram_dense();
    auto b = ne.moment_dense();
    for (int col = 0; col < q; ++col) {
        int pivot = col;
        for (int r = col + 1; r < q; ++r)
            if (std::abs(a[r * q + col]) > std::abs(a[pivot * q + col])) pivot = r;
        for (int cc = 0; cc < q; ++cc) std::swap(a[col * q + cc], a[pivot * q + cc]);
        std::swap(b[col], b[pivot]);
        for (int r = 0; r < q; ++r) {
            if (r == col) continue;
            const double f = a[r * q + col] / a[col * q + col];
            for (int cc = col; cc < q; ++cc) a[r * q + cc] -= f * a[col * q + cc];
            b[r] -= f * b[col];
        }
    }
    for (int i = 0; i < q; ++i)
        CHECK(block_solution[i] == doctest::Approx(b[i] / a[i * q + i]).epsilon(1e-10));
}

TEST_CASE("surface csv round trip is exact") {
    auto basis = two_patch_linear();
    Surface s{basis, {1.25, -0.3333333333333333, 17.0, 1e-17}};
    const auto file = std::filesystem::temp_directory_path() / "storeval_surface_test.csv";
    write_surface_csv(s, file);
    const Surface back = read_surface_csv(basis, file);
    CHECK(back.coeffs == s.coeffs);
    std::filesystem::remove(file);
}
