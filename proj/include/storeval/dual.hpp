#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "storeval/valuemodel.hpp"

namespace storeval {

/// Implementation I tabulates the surplus on the y grid and restricts
/// candidates so y - h lands back on the grid; Implementation II fits a
/// per-path polynomial curve in y after each backward step.
enum class DualImpl { table, curve_fit };

struct DualConfig {
    DualImpl impl = DualImpl::curve_fit;
    std::size_t n_y = 320;  // G^y size, endpoints included
    Interval y_domain;
    std::vector<double> grid;  // optional explicit G^y; overrides n_y
    int n_h = 33;              // candidate count per constraint interval (curve_fit)
    std::shared_ptr<const PatchBasis> phi;  // y-only test functions (curve_fit)
    std::vector<double> y0;                 // report points
    SolveOptions solve;
};

/// Per-path surplus curve at one time step: a table over the y grid (Impl I)
/// or coefficients over the phi basis (Impl II).
struct SurplusCurve {
    int t = 0;
    std::size_t path_id = 0;
    std::vector<double> table;
    std::vector<double> lambda;
};

struct DualEstimate {
    struct Row {
        double y0 = 0.0;
        double value0 = 0.0;        // a priori V_0(y0, X0)
        double mean_surplus = 0.0;  // (1/N) sum_i F0(y0, path i)
        double stderr_ = 0.0;
        double upper = 0.0;  // value0 + mean_surplus
    };
    std::vector<Row> rows;
    std::vector<std::vector<double>> path_surplus;  // [y0 index][path]
    std::size_t n_paths = 0;
    std::size_t fallback_count = 0;  // steps with no admissible candidate
};

/// One node of the pathwise recursion,
///   sup_h H_t(h,x) + cont(y-h) - V_t(y,x) + surplus_next(y-h),
/// over the given admissible candidates. Falls back to h = 0 when the domain
/// clamp empties the set.
double surplus_step(const ControlProblem& problem, int t, double y, double x,
                    const StepEval& eval, const std::function<double(double)>& surplus_next,
                    std::span<const double> candidates, bool* fell_back = nullptr);

/// Least-squares fit of tabulated surplus values onto the phi basis.
FitResult fit_surplus_curve(std::span<const double> grid_y, std::span<const double> values,
                            std::shared_ptr<const PatchBasis> phi, const SolveOptions& opts = {});

/// Backward pathwise dynamic program per trajectory, then the Monte-Carlo
/// average of the time-0 surplus per starting inventory.
DualEstimate run_dual(const ControlProblem& problem, const PathSet& paths, const ValueModel& vm,
                      const DualConfig& config);

void write_dual_csv(const DualEstimate& est, const std::filesystem::path& file,
                    const std::vector<std::string>& extra_comments = {});
void write_path_surplus_csv(const DualEstimate& est, const std::filesystem::path& file,
                            const std::vector<std::string>& extra_comments = {});

}  // namespace storeval
