#include "storeval/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "storeval/csv.hpp"
#include "storeval/threading.hpp"

namespace storeval {

namespace {
std::size_t packed_size(int s) { return static_cast<std::size_t>(s) * (s + 1) / 2; }
}

NormalEquations::NormalEquations(std::shared_ptr<const PatchBasis> basis)
    : basis_(std::move(basis)) {
    require(basis_ != nullptr, "normal equations: null basis");
    q_ = basis_->dim();
    for (const auto& p : basis_->patches()) {
        block_offset_.push_back(p.offset);
        block_size_.push_back(static_cast<int>(p.monomials.size()));
        gram_.emplace_back(packed_size(block_size_.back()), 0.0);
        moment_.emplace_back(block_size_.back(), 0.0);
    }
}

NormalEquations::NormalEquations(int dense_dim) : q_(dense_dim) {
    require(dense_dim >= 1, "normal equations: dimension must be >= 1");
    block_offset_.push_back(0);
    block_size_.push_back(dense_dim);
    gram_.emplace_back(packed_size(dense_dim), 0.0);
    moment_.emplace_back(dense_dim, 0.0);
}

void NormalEquations::add_local(int patch, std::span<const double> local, double target) {
    auto& g = gram_[patch];
    auto& mo = moment_[patch];
    const int s = block_size_[patch];
    std::size_t k = 0;
    for (int i = 0; i < s; ++i) {
        const double fi = local[i];
        for (int j = i; j < s; ++j) g[k++] += fi * local[j];
        mo[i] += target * fi;
    }
    ++n_;
}

void NormalEquations::add_features(std::span<const double> features, double target) {
    require(basis_ == nullptr, "normal equations: dense add requires dense mode");
    require(static_cast<int>(features.size()) == q_, "normal equations: feature size mismatch");
    for (double f : features)
        require(std::isfinite(f), "normal equations: non-finite feature");
    add_local(0, features, target);
}

void NormalEquations::merge(const NormalEquations& other) {
    require(q_ == other.q_ && gram_.size() == other.gram_.size(),
            "normal equations: merge layout mismatch");
    for (std::size_t b = 0; b < gram_.size(); ++b) {
        for (std::size_t k = 0; k < gram_[b].size(); ++k) gram_[b][k] += other.gram_[b][k];
        for (std::size_t k = 0; k < moment_[b].size(); ++k) moment_[b][k] += other.moment_[b][k];
    }
    n_ += other.n_;
}

std::vector<double> NormalEquations::block_gram(std::size_t b) const {
    const int s = block_size_[b];
    std::vector<double> out(static_cast<std::size_t>(s) * s, 0.0);
    const double inv_n = n_ ? 1.0 / static_cast<double>(n_) : 0.0;
    std::size_t k = 0;
    for (int i = 0; i < s; ++i)
        for (int j = i; j < s; ++j) {
            const double v = gram_[b][k++] * inv_n;
            out[i * s + j] = v;
            out[j * s + i] = v;
        }
    return out;
}

std::vector<double> NormalEquations::block_moment(std::size_t b) const {
    std::vector<double> out = moment_[b];
    const double inv_n = n_ ? 1.0 / static_cast<double>(n_) : 0.0;
    for (double& v : out) v *= inv_n;
    return out;
}

std::vector<double> NormalEquations::gram_dense() const {
    std::vector<double> out(static_cast<std::size_t>(q_) * q_, 0.0);
    for (std::size_t b = 0; b < gram_.size(); ++b) {
        const auto blk = block_gram(b);
        const int off = block_offset_[b], s = block_size_[b];
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) out[(off + i) * q_ + off + j] = blk[i * s + j];
    }
    return out;
}

std::vector<double> NormalEquations::moment_dense() const {
    std::vector<double> out(q_, 0.0);
    for (std::size_t b = 0; b < moment_.size(); ++b) {
        const auto blk = block_moment(b);
        std::copy(blk.begin(), blk.end(), out.begin() + block_offset_[b]);
    }
    return out;
}

namespace {

constexpr std::size_t kShard = 8192;

NormalEquations merge_tree(std::vector<NormalEquations>& shards, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return std::move(shards[lo]);
    const std::size_t mid = lo + (hi - lo) / 2;
    NormalEquations left = merge_tree(shards, lo, mid);
    const NormalEquations right = merge_tree(shards, mid, hi);
    left.merge(right);
    return left;
}

}  // namespace

NormalEquations assemble(std::shared_ptr<const PatchBasis> basis,
                         std::span<const RegSample> samples) {
    require(!samples.empty(), "assemble: empty sample set");
    const std::size_t n_shards = (samples.size() + kShard - 1) / kShard;
    std::vector<NormalEquations> shards(n_shards, NormalEquations(basis));
    parallel_chunks(samples.size(), kShard, [&](std::size_t begin, std::size_t end) {
        NormalEquations& ne = shards[begin / kShard];
        std::vector<double> local;
        for (std::size_t i = begin; i < end; ++i) {
            const RegSample& s = samples[i];
            require(std::isfinite(s.y) && std::isfinite(s.x) && std::isfinite(s.target),
                    "assemble: non-finite sample");
            const int patch = basis->eval_local(s.y, s.x, local);
            if (patch < 0)
                ne.add_outside();
            else
                ne.add_local(patch, local, s.target);
        }
    });
    return merge_tree(shards, 0, n_shards);
}

std::vector<double> solve(const NormalEquations& ne, const SolveOptions& opts, SolveInfo* info) {
    std::vector<double> coeffs(ne.dim(), 0.0);
    SolveInfo local_info;

    // scale-relative default ridge
    double trace = 0.0;
    for (std::size_t b = 0; b < ne.block_count(); ++b) {
        const auto g = ne.block_gram(b);
        const int s = ne.block_size(b);
        for (int i = 0; i < s; ++i) trace += g[i * s + i];
    }
    const double ridge = opts.ridge >= 0.0 ? opts.ridge : 1e-10 * trace / ne.dim();
    local_info.ridge_used = ridge;

    for (std::size_t b = 0; b < ne.block_count(); ++b) {
        const int s = ne.block_size(b);
        const auto g = ne.block_gram(b);
        const auto mo = ne.block_moment(b);
        Eigen::MatrixXd a(s, s);
        Eigen::VectorXd rhs(s);
        for (int i = 0; i < s; ++i) {
            rhs(i) = mo[i];
            for (int j = 0; j < s; ++j) a(i, j) = g[i * s + j];
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
        const int rank = static_cast<int>(cod.rank());
        local_info.rank += rank;
        if (rank < s) {
            local_info.rank_deficient = true;
            local_info.deficient_blocks.push_back(b);
        }
        Eigen::VectorXd sol;
        if (ridge > 0.0) {
            Eigen::MatrixXd reg = a + ridge * Eigen::MatrixXd::Identity(s, s);
            sol = reg.ldlt().solve(rhs);
        } else {
            sol = cod.solve(rhs);  // minimum-norm least squares
        }
        for (int i = 0; i < s; ++i) coeffs[ne.block_offset(b) + i] = sol(i);
    }
    if (info) *info = std::move(local_info);
    return coeffs;
}

double Surface::eval(double y, double x) const {
    thread_local std::vector<double> local;
    const int patch = basis->eval_local(y, x, local);
    if (patch < 0) return 0.0;
    const int off = basis->patches()[patch].offset;
    double v = 0.0;
    for (std::size_t m = 0; m < local.size(); ++m) v += coeffs[off + m] * local[m];
    return v;
}

FitResult fit_surface(std::shared_ptr<const PatchBasis> basis, std::span<const RegSample> points,
                      const SolveOptions& opts) {
    require(!points.empty(), "fit_surface: need at least one point");
    const NormalEquations ne = assemble(basis, points);
    FitResult r;
    r.surface.basis = basis;
    r.surface.coeffs = solve(ne, opts, &r.info);
    for (const auto& p : points)
        r.max_abs_residual =
            std::max(r.max_abs_residual, std::abs(p.target - r.surface.eval(p.y, p.x)));
    return r;
}

void write_surface_csv(const Surface& s, const std::filesystem::path& file,
                       const std::vector<std::string>& extra_comments) {
    CsvWriter w(file);
    for (const auto& c : extra_comments) w.comment(c);
    w.comment("dim: " + std::to_string(s.basis->dim()));
    w.row("patch_id,monomial,coeff");
    const auto& patches = s.basis->patches();
    for (std::size_t pi = 0; pi < patches.size(); ++pi) {
        const auto& p = patches[pi];
        for (std::size_t m = 0; m < p.monomials.size(); ++m) {
            std::string line = std::to_string(pi);
            line += ",y" + std::to_string(p.monomials[m].py) + "x" +
                    std::to_string(p.monomials[m].px);
            line += ',';
            line += format_double(s.coeffs[p.offset + m], 17);
            w.row(line);
        }
    }
}

Surface read_surface_csv(std::shared_ptr<const PatchBasis> basis,
                         const std::filesystem::path& file) {
    const CsvFile f = read_csv(file);
    Surface s;
    s.basis = basis;
    s.coeffs.assign(basis->dim(), 0.0);
    require(f.rows.size() == static_cast<std::size_t>(basis->dim()),
            "surface csv: coefficient count does not match basis");
    const std::size_t ip = f.column("patch_id"), im = f.column("monomial"), ic = f.column("coeff");
    const auto& patches = basis->patches();
    std::size_t row = 0;
    for (std::size_t pi = 0; pi < patches.size(); ++pi) {
        const auto& p = patches[pi];
        for (std::size_t m = 0; m < p.monomials.size(); ++m, ++row) {
            const auto& r = f.rows[row];
            require(std::stoul(r[ip]) == pi, "surface csv: patch order mismatch");
            const std::string mono =
                "y" + std::to_string(p.monomials[m].py) + "x" + std::to_string(p.monomials[m].px);
            require(r[im] == mono, "surface csv: monomial order mismatch");
            s.coeffs[p.offset + m] = std::stod(r[ic]);
        }
    }
    return s;
}

}  // namespace storeval
