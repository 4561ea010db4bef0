#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "storeval/common.hpp"

namespace storeval {

/// How much of (t, y, x) the constraint set actually reads. Lets the solvers
/// precompute admissible-action windows when the set is static.
enum class ConstraintDep { y_only, time_and_y, full };

/// Payoff restricted to fixed (t, x), exploiting that every payoff here is
/// linear in h on each side of zero:
///   H = pos_slope * h        for h >= 0,
///   H = neg_slope * h - drop for h <  0.
struct PayoffSlopes {
    double pos_slope = 0.0;
    double neg_slope = 0.0;
    double drop = 0.0;

    double operator()(double h) const {
        return h >= 0.0 ? pos_slope * h : neg_slope * h - drop;
    }
};

/// A decoupled control problem: exercising h moves the inventory,
/// y' = y - h, and never feeds back into the price process.
struct ControlProblem {
    int horizon = 0;  // T: index of the last decision
    std::function<double(int t, double h, double x)> payoff;
    std::function<Interval(int t, double y, double x)> constraints;
    Interval y_domain;
    Interval y0_domain;
    ConstraintDep constraint_dep = ConstraintDep::full;
    /// Optional fast path; when set it must agree with payoff pointwise.
    std::function<PayoffSlopes(int t, double x)> payoff_slopes;
};

/// Storage facility constants. Rates and volumes are in MMcf; prices are in
/// $/MMBtu. volume_scale converts MMcf to the normalized control unit the
/// solvers operate in (see normalized()).
struct GasStorageSpec {
    double y_max = 2000.0;        // working gas capacity (MMcf)
    double y_base = 500.0;        // base gas (MMcf)
    double c_max_at_full = 250.0; // max production rate at full storage (MMcf/day)
    double c_min_at_empty = -80.0;// max injection rate at empty storage (MMcf/day, < 0)
    double loss_rate = 1.7;       // gas lost per day while injecting (MMcf/day)
    double r_annual = 0.10;       // discount rate (1/year)
    double dt = 1.0;              // day
    double volume_scale = 100.0;  // MMcf per control unit
    int horizon = 365;

    void validate() const;

    /// Same facility with volumes divided by volume_scale. The rate formulas
    /// are scale invariant, so the normalized spec describes the identical
    /// physics in control units.
    GasStorageSpec normalized() const;
};

/// Production/injection rate bounds at inventory y:
///   c_max(y) = C0 sqrt(y),            C0 = c_max_at_full / sqrt(y_max)
///   c_min(y) = -C1 sqrt(1/(y+y_base) + C2),
///   C2 = -1/(y_max + y_base),  C1 = |c_min_at_empty| / sqrt(1/y_base + C2).
struct GasRates {
    double c_min = 0.0;  // <= 0
    double c_max = 0.0;  // >= 0
};
GasRates gas_rates(const GasStorageSpec& spec, double y);

/// Daily exercise interval: sell at most min(c_max(y) dt, y), inject at most
/// min(|c_min(y)| dt, y_max - y).
Interval gas_constraints(const GasStorageSpec& spec, int t, double y, double x);

/// Discounted cash flow of moving h during day t at price x. Injection pays
/// for the gas lost in transit; the terminal day pays nothing.
double gas_payoff(const GasStorageSpec& spec, int t, double h, double x);

/// The storage facility as a ControlProblem in normalized control units.
ControlProblem make_gas_problem(const GasStorageSpec& spec);

/// Swing contract: the right to buy h in [m_daily, M_daily] each day at the
/// strike, with the cumulative amount kept inside [cum_min, cum_max]. The
/// control state y is the remaining purchase allowance.
ControlProblem swing_instance(double strike, double m_daily, double M_daily, double cum_min,
                              double cum_max, int horizon);

/// Candidate exercise amounts used by the per-step optimizers.
///   bang_bang:     {h_lo, 0 if admissible, h_hi}
///   refined_grid:  n_h equidistant points across the interval
///   snap_to_grid:  h = y - g for grid points g (keeps y - h on the grid)
struct CandidateRule {
    enum class Kind { bang_bang, refined_grid, snap_to_grid };
    Kind kind = Kind::bang_bang;
    int n_h = 33;
    std::shared_ptr<const std::vector<double>> grid;

    static CandidateRule bang_bang() { return {}; }
    static CandidateRule refined(int n_h);
    static CandidateRule snapped(std::shared_ptr<const std::vector<double>> grid);

    /// Fills `out` with admissible candidates for state y and interval k.
    void collect(double y, const Interval& k, std::vector<double>& out) const;
};

/// True when every h in constraints(t,y,x) keeps y-h inside y_domain;
/// checked pointwise, used by tests and input validation.
bool feasibility_closed(const ControlProblem& problem, int t, double y, double x);

/// Contiguous run of ascending-grid indices j whose move h = y - grid[j] is
/// admissible in k. Shared by the tabulated pathwise recursion and the
/// finite-instance discretizer so their action sets agree exactly.
struct GridWindow {
    int lo = 0;
    int hi = -1;  // inclusive; empty when hi < lo
    bool empty() const { return hi < lo; }
};
GridWindow admissible_window(double y, const Interval& k, std::span<const double> grid);

}  // namespace storeval
