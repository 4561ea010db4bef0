#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "storeval/common.hpp"
#include "storeval/process.hpp"

namespace storeval {

/// Rank-1 lattice in [0,1): points {frac(i*generator/n + offset)}.
struct Rank1Lattice {
    std::size_t n = 1;
    std::uint64_t generator = 1;  // must be coprime to n
    double offset = 0.0;          // in [0,1)

    std::vector<double> points() const;
};

std::vector<double> lattice_points(std::size_t n, std::uint64_t generator, double offset);

/// One segment of the initial-price grid: `count` equidistant points on the
/// closed interval, endpoints included.
struct GridSegment {
    Interval range;
    std::size_t count = 0;
};

/// Concatenation of per-segment equidistant grids. Segments must be ordered
/// and non-overlapping; touching endpoints are allowed and kept.
std::vector<double> initial_price_grid(std::span<const GridSegment> segments);

/// Time-t sample set pairing simulated prices with lattice-generated control
/// points: each path's price at t carries n_y consecutive lattice values
/// scaled into y_domain.
struct GridYX {
    int t = 0;
    Interval y_domain;
    struct Entry {
        double y;
        double x;
        std::uint32_t path_id;
    };
    std::vector<Entry> entries;
};

GridYX build_yx_grid(const PathSet& paths, int t, std::size_t n_y, Interval y_domain,
                     std::uint64_t lattice_seed, std::uint64_t generator = 1);

void write_grid_csv(const GridYX& grid, const std::filesystem::path& file);

/// y^py * x^px on the owning patch, zero elsewhere.
struct Monomial {
    int py = 0;
    int px = 0;
};

/// A rectangle in (y,x) with its local monomials. Rectangles are half-open
/// [lo, hi) in each direction unless the closed flag marks an outer boundary.
struct Patch {
    Interval y;
    Interval x;
    bool y_closed_hi = false;
    bool x_closed_hi = false;
    std::vector<Monomial> monomials;
    int offset = 0;  // first slot in the global coefficient vector
};

/// Piecewise-polynomial test functions over disjoint patches; evaluation is
/// zero outside their union. Function count Q = sum of per-patch monomials.
class PatchBasis {
public:
    /// Grid of patches from y_edges x x_edges cells, each carrying `common`
    /// monomials; x-row r additionally carries x_row_extras[r] when present.
    static PatchBasis tensor(std::vector<double> y_edges, std::vector<double> x_edges,
                             std::vector<Monomial> common,
                             const std::map<int, std::vector<Monomial>>& x_row_extras = {});

    /// y-only cells spanning all x: per cell the monomials 1, y, .., y^degree.
    static PatchBasis y_cells(std::vector<double> y_edges, int degree);

    int dim() const { return dim_; }
    const std::vector<Patch>& patches() const { return patches_; }
    int max_y_degree() const { return max_y_degree_; }

    /// Index of the patch containing (y,x), or -1.
    int patch_of(double y, double x) const;

    /// Sparse evaluation: fills `local` with the containing patch's monomial
    /// values and returns the patch index (-1 and empty local when outside).
    int eval_local(double y, double x, std::vector<double>& local) const;

    /// Dense length-Q vector; zero outside all patches.
    std::vector<double> eval_dense(double y, double x) const;

private:
    std::vector<Patch> patches_;
    int dim_ = 0;
    int max_y_degree_ = 0;
};

/// Restriction of a coefficient surface to fixed x: per y-cell polynomial
/// coefficients, evaluable in a handful of flops.
struct YSection {
    struct Cell {
        double lo, hi;
        bool closed_hi;
        double coeff[8];  // y-powers 0..deg
        int deg;
    };
    std::vector<Cell> cells;  // sorted by lo, disjoint

    double operator()(double y) const {
        for (const auto& c : cells) {
            if (y < c.lo) break;
            if (y < c.hi || (c.closed_hi && y == c.hi)) {
                double v = c.coeff[c.deg];
                for (int d = c.deg - 1; d >= 0; --d) v = v * y + c.coeff[d];
                return v;
            }
        }
        return 0.0;
    }
};

/// Section of sum_q coeffs[q] psi_q(., x).
YSection y_section(const PatchBasis& basis, std::span<const double> coeffs, double x);

/// Section of the average surface (1/L) sum_l sum_q coeffs[q] psi_q(., x_l);
/// the workhorse behind the nested continuation estimate.
YSection y_section_mixture(const PatchBasis& basis, std::span<const double> coeffs,
                           std::span<const double> x_samples);

}  // namespace storeval
