#include "storeval/gridbasis.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "storeval/csv.hpp"
#include "storeval/rng.hpp"

namespace storeval {

std::vector<double> lattice_points(std::size_t n, std::uint64_t generator, double offset) {
    require(n >= 1, "lattice: need n >= 1");
    require(generator >= 1, "lattice: generator must be positive");
    require(std::gcd(static_cast<std::uint64_t>(n), generator) == 1,
            "lattice: generator must be coprime to n");
    std::vector<double> pts(n);
    const double g_over_n = static_cast<double>(generator % n) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = std::fma(static_cast<double>(i), g_over_n, offset);
        v -= std::floor(v);
        if (v >= 1.0) v = 0.0;  // guard against fp rounding at the seam
        pts[i] = v;
    }
    return pts;
}

std::vector<double> Rank1Lattice::points() const { return lattice_points(n, generator, offset); }

std::vector<double> initial_price_grid(std::span<const GridSegment> segments) {
    require(!segments.empty(), "price grid: need at least one segment");
    std::vector<double> pts;
    double prev_hi = -std::numeric_limits<double>::infinity();
    for (const auto& seg : segments) {
        require(seg.count >= 1, "price grid: segment count must be >= 1");
        require(!seg.range.empty(), "price grid: segment interval is empty");
        require(seg.range.lo >= prev_hi, "price grid: segments overlap or are out of order");
        prev_hi = seg.range.hi;
        const auto part = linspace(seg.range.lo, seg.range.hi, seg.count);
        pts.insert(pts.end(), part.begin(), part.end());
    }
    return pts;
}

GridYX build_yx_grid(const PathSet& paths, int t, std::size_t n_y, Interval y_domain,
                     std::uint64_t lattice_seed, std::uint64_t generator) {
    require(n_y >= 1, "yx grid: need n_y >= 1");
    require(t >= 0 && t <= paths.horizon, "yx grid: t outside the path horizon");
    GridYX grid;
    grid.t = t;
    grid.y_domain = y_domain;
    const std::size_t total = paths.n_paths * n_y;
    // random offset per time step; generator 1 reduces to a shifted
    // equidistant sequence, which is all a one-dimensional control needs
    const double offset = CounterRng(lattice_seed, static_cast<std::uint64_t>(t)).uniform(0);
    const auto lattice = lattice_points(total, generator, offset);
    grid.entries.resize(total);
    const double width = y_domain.width();
    for (std::size_t i = 0; i < paths.n_paths; ++i) {
        const double x = paths.at(i, t);
        for (std::size_t j = 0; j < n_y; ++j) {
            auto& e = grid.entries[i * n_y + j];
            e.y = y_domain.lo + width * lattice[i * n_y + j];
            e.x = x;
            e.path_id = static_cast<std::uint32_t>(i);
        }
    }
    return grid;
}

void write_grid_csv(const GridYX& grid, const std::filesystem::path& file) {
    CsvWriter w(file);
    w.row("t,path_id,y,x");
    std::string line;
    for (const auto& e : grid.entries) {
        line = std::to_string(grid.t);
        line += ',';
        line += std::to_string(e.path_id);
        line += ',';
        line += format_double(e.y, 12);
        line += ',';
        line += format_double(e.x, 12);
        w.row(line);
    }
}

namespace {

bool side_contains(const Interval& r, bool closed_hi, double v) {
    return v >= r.lo && (v < r.hi || (closed_hi && v == r.hi));
}

bool patch_contains(const Patch& p, double y, double x) {
    return side_contains(p.y, p.y_closed_hi, y) && side_contains(p.x, p.x_closed_hi, x);
}

double ipow(double v, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= v;
    return r;
}

}  // namespace

PatchBasis PatchBasis::tensor(std::vector<double> y_edges, std::vector<double> x_edges,
                              std::vector<Monomial> common,
                              const std::map<int, std::vector<Monomial>>& x_row_extras) {
    require(y_edges.size() >= 2 && x_edges.size() >= 2, "basis: need at least one cell per axis");
    require(std::is_sorted(y_edges.begin(), y_edges.end()) &&
                std::is_sorted(x_edges.begin(), x_edges.end()),
            "basis: edges must be ascending");
    PatchBasis b;
    const std::size_t ny = y_edges.size() - 1, nx = x_edges.size() - 1;
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            Patch p;
            p.y = {y_edges[iy], y_edges[iy + 1]};
            p.x = {x_edges[ix], x_edges[ix + 1]};
            p.y_closed_hi = (iy + 1 == ny);
            p.x_closed_hi = (ix + 1 == nx);
            p.monomials = common;
            if (auto it = x_row_extras.find(static_cast<int>(ix)); it != x_row_extras.end())
                p.monomials.insert(p.monomials.end(), it->second.begin(), it->second.end());
            p.offset = b.dim_;
            b.dim_ += static_cast<int>(p.monomials.size());
            for (const auto& m : p.monomials) b.max_y_degree_ = std::max(b.max_y_degree_, m.py);
            b.patches_.push_back(std::move(p));
        }
    }
    require(b.max_y_degree_ < 8, "basis: y degree too high for section evaluation");
    return b;
}

PatchBasis PatchBasis::y_cells(std::vector<double> y_edges, int degree) {
    require(degree >= 0 && degree < 8, "basis: degree out of range");
    std::vector<Monomial> monomials;
    for (int d = 0; d <= degree; ++d) monomials.push_back({d, 0});
    const double inf = std::numeric_limits<double>::infinity();
    PatchBasis b;
    const std::size_t ny = y_edges.size() - 1;
    require(ny >= 1 && std::is_sorted(y_edges.begin(), y_edges.end()),
            "basis: need ascending y edges");
    for (std::size_t iy = 0; iy < ny; ++iy) {
        Patch p;
        p.y = {y_edges[iy], y_edges[iy + 1]};
        p.x = {-inf, inf};
        p.y_closed_hi = (iy + 1 == ny);
        p.x_closed_hi = true;
        p.monomials = monomials;
        p.offset = b.dim_;
        b.dim_ += static_cast<int>(monomials.size());
        b.patches_.push_back(std::move(p));
    }
    b.max_y_degree_ = degree;
    return b;
}

int PatchBasis::patch_of(double y, double x) const {
    for (std::size_t i = 0; i < patches_.size(); ++i)
        if (patch_contains(patches_[i], y, x)) return static_cast<int>(i);
    return -1;
}

int PatchBasis::eval_local(double y, double x, std::vector<double>& local) const {
    local.clear();
    const int pi = patch_of(y, x);
    if (pi < 0) return -1;
    const Patch& p = patches_[pi];
    local.reserve(p.monomials.size());
    for (const auto& m : p.monomials) local.push_back(ipow(y, m.py) * ipow(x, m.px));
    return pi;
}

std::vector<double> PatchBasis::eval_dense(double y, double x) const {
    std::vector<double> out(dim_, 0.0);
    std::vector<double> local;
    const int pi = eval_local(y, x, local);
    if (pi >= 0)
        std::copy(local.begin(), local.end(), out.begin() + patches_[pi].offset);
    return out;
}

namespace {

YSection::Cell* find_or_add_cell(YSection& s, const Interval& y, bool closed_hi) {
    for (auto& c : s.cells)
        if (c.lo == y.lo && c.hi == y.hi) return &c;
    YSection::Cell c;
    c.lo = y.lo;
    c.hi = y.hi;
    c.closed_hi = closed_hi;
    std::memset(c.coeff, 0, sizeof(c.coeff));
    c.deg = 0;
    s.cells.push_back(c);
    return &s.cells.back();
}

void sort_cells(YSection& s) {
    std::sort(s.cells.begin(), s.cells.end(),
              [](const YSection::Cell& a, const YSection::Cell& b) { return a.lo < b.lo; });
}

}  // namespace

YSection y_section(const PatchBasis& basis, std::span<const double> coeffs, double x) {
    YSection s;
    for (const auto& p : basis.patches()) {
        if (!side_contains(p.x, p.x_closed_hi, x)) continue;
        auto* cell = find_or_add_cell(s, p.y, p.y_closed_hi);
        for (std::size_t m = 0; m < p.monomials.size(); ++m) {
            const auto& mono = p.monomials[m];
            cell->coeff[mono.py] += coeffs[p.offset + m] * ipow(x, mono.px);
            cell->deg = std::max(cell->deg, mono.py);
        }
    }
    sort_cells(s);
    return s;
}

YSection y_section_mixture(const PatchBasis& basis, std::span<const double> coeffs,
                           std::span<const double> x_samples) {
    YSection s;
    const double inv_l = 1.0 / static_cast<double>(x_samples.size());
    for (const auto& p : basis.patches()) {
        // power sums of the samples landing in this patch's x-range
        double pow_sum[8] = {0};
        int max_px = 0;
        for (const auto& mono : p.monomials) max_px = std::max(max_px, mono.px);
        bool any = false;
        for (double xs : x_samples) {
            if (!side_contains(p.x, p.x_closed_hi, xs)) continue;
            any = true;
            double v = 1.0;
            for (int e = 0; e <= max_px; ++e) {
                pow_sum[e] += v;
                v *= xs;
            }
        }
        if (!any) continue;
        auto* cell = find_or_add_cell(s, p.y, p.y_closed_hi);
        for (std::size_t m = 0; m < p.monomials.size(); ++m) {
            const auto& mono = p.monomials[m];
            cell->coeff[mono.py] += coeffs[p.offset + m] * pow_sum[mono.px] * inv_l;
            cell->deg = std::max(cell->deg, mono.py);
        }
    }
    sort_cells(s);
    return s;
}

}  // namespace storeval
