#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "storeval/gridbasis.hpp"

namespace storeval {

struct RegSample {
    double y = 0.0;
    double x = 0.0;
    double target = 0.0;
};

/// Monte-Carlo normal equations: gram = mean of psi psi^T, moment = mean of
/// target * psi. With patchwise test functions the gram is block diagonal by
/// patch, and only the per-patch blocks are stored. Samples outside every
/// patch contribute zero features but still count toward the average.
class NormalEquations {
public:
    explicit NormalEquations(std::shared_ptr<const PatchBasis> basis);
    explicit NormalEquations(int dense_dim);  // single dense block

    void add_local(int patch, std::span<const double> local, double target);
    void add_outside() { ++n_; }
    void add_features(std::span<const double> features, double target);  // dense mode only
    void merge(const NormalEquations& other);

    std::size_t n_samples() const { return n_; }
    int dim() const { return q_; }
    std::size_t block_count() const { return block_size_.size(); }
    int block_offset(std::size_t b) const { return block_offset_[b]; }
    int block_size(std::size_t b) const { return block_size_[b]; }
    /// Averaged gram block, row-major size x size.
    std::vector<double> block_gram(std::size_t b) const;
    std::vector<double> block_moment(std::size_t b) const;

    std::vector<double> gram_dense() const;    // Q*Q row-major, averaged
    std::vector<double> moment_dense() const;  // length Q, averaged

    const PatchBasis* basis() const { return basis_.get(); }

private:
    std::shared_ptr<const PatchBasis> basis_;
    std::vector<int> block_offset_, block_size_;
    std::vector<std::vector<double>> gram_;    // packed upper triangles, raw sums
    std::vector<std::vector<double>> moment_;  // raw sums
    std::size_t n_ = 0;
    int q_ = 0;
};

/// Feature evaluation plus accumulation over fixed-size shards merged in a
/// fixed pairwise tree; the result is identical for any worker count.
NormalEquations assemble(std::shared_ptr<const PatchBasis> basis,
                         std::span<const RegSample> samples);

struct SolveOptions {
    /// Tikhonov weight; negative selects the default 1e-10 * trace(gram)/Q,
    /// which leaves well-conditioned systems unchanged to ~1e-10.
    double ridge = -1.0;
};

struct SolveInfo {
    bool rank_deficient = false;
    int rank = 0;
    double ridge_used = 0.0;
    std::vector<std::size_t> deficient_blocks;
};

/// Least-squares coefficients via (gram + ridge I) c = moment, solved block
/// by block. A singular block with ridge 0 falls back to the minimum-norm
/// solution and is flagged in `info`.
std::vector<double> solve(const NormalEquations& ne, const SolveOptions& opts = {},
                          SolveInfo* info = nullptr);

/// A fitted linear combination of the basis functions.
struct Surface {
    std::shared_ptr<const PatchBasis> basis;
    std::vector<double> coeffs;

    double eval(double y, double x) const;
    YSection section(double x) const { return y_section(*basis, coeffs, x); }
};

struct FitResult {
    Surface surface;
    SolveInfo info;
    double max_abs_residual = 0.0;  // over the fitted points
};

FitResult fit_surface(std::shared_ptr<const PatchBasis> basis, std::span<const RegSample> points,
                      const SolveOptions& opts = {});

void write_surface_csv(const Surface& s, const std::filesystem::path& file,
                       const std::vector<std::string>& extra_comments = {});
Surface read_surface_csv(std::shared_ptr<const PatchBasis> basis,
                         const std::filesystem::path& file);

}  // namespace storeval
