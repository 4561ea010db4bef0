#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "storeval/problem.hpp"
#include "storeval/process.hpp"
#include "storeval/regression.hpp"

namespace storeval {

/// Exact terminal optimization sup_{h in K_T} H_T(h, x). H is piecewise
/// linear in h for the problems built here, so the supremum is attained at an
/// interval endpoint or at h = 0.
double terminal_value(const ControlProblem& problem, double y, double x);

struct OptimizeResult {
    double h = 0.0;
    double value = 0.0;
    bool fell_back = false;  // no admissible candidate survived the domain clamp
};

/// Maximizes H_t(h, x) + continuation(y - h) over the rule's candidate set.
/// Candidates leaving y_domain by more than a relative epsilon are dropped;
/// survivors are clamped before evaluation. Ties go to the smaller |h|.
OptimizeResult optimize_step(const ControlProblem& problem, int t, double y, double x,
                             const std::function<double(double)>& continuation,
                             const CandidateRule& rule, std::vector<double>& scratch);

/// Convenience wrapper evaluating the continuation surface at (y - h, x).
OptimizeResult bangbang_optimize(const ControlProblem& problem, int t, double y, double x,
                                 const Surface& ghat,
                                 const CandidateRule& rule = CandidateRule::bang_bang());

/// One backward regression step: fits Ghat_t from tuples carrying the time-t
/// price as feature and the time-(t+1) value as target.
FitResult regress_continuation(std::shared_ptr<const PatchBasis> basis,
                               std::span<const RegSample> next_values,
                               const SolveOptions& opts = {});

struct TimeDiagnostics {
    int t = 0;
    bool ghat_rank_deficient = false;
    bool vfit_rank_deficient = false;
    double vfit_max_residual = 0.0;  // max |Vbar - fitted V_t| over grid nodes
    double ghat_ridge = 0.0;
};

/// Value surfaces V_t and continuation surfaces Ghat_t for t = 0..T-1; V_T
/// stays the exact terminal optimization and is never regressed.
struct SurfaceStack {
    int horizon = 0;
    std::vector<Surface> value;         // V_t
    std::vector<Surface> continuation;  // Ghat_t
    std::function<double(double, double)> terminal;
    std::vector<TimeDiagnostics> diagnostics;

    double value_at(int t, double y, double x) const;

    /// Accumulated max-abs fit residual across all time steps; a crude bound
    /// on how far the stack can drift from the exact backward recursion on
    /// the sampled nodes.
    double residual_bound() const;
};

struct AprioriConfig {
    std::size_t n_y = 6;  // lattice y-points per path per time step
    Interval y_domain;
    std::uint64_t lattice_seed = 0;
    std::uint64_t lattice_generator = 1;
    CandidateRule rule;  // per-step optimizer candidates
    SolveOptions solve;
};

/// Backward-induction regression over the path set: regress Ghat_t from the
/// time-(t+1) grid, optimize at the time-t grid nodes, then fit V_t on the
/// same basis.
SurfaceStack run_apriori(const ControlProblem& problem, const PathSet& paths,
                         std::shared_ptr<const PatchBasis> basis, const AprioriConfig& config);

void write_stack(const SurfaceStack& stack, const std::filesystem::path& dir,
                 const std::vector<std::string>& comments = {});
SurfaceStack read_stack(const ControlProblem& problem, std::shared_ptr<const PatchBasis> basis,
                        const std::filesystem::path& dir);

}  // namespace storeval
