#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "storeval/dual.hpp"
#include "storeval/valuemodel.hpp"

namespace storeval {

/// A control problem restricted to a finite price chain and a finite control
/// grid: the ground truth that the regression, dual, and policy estimators
/// are validated against. Actions move the inventory between grid points and
/// are stored as contiguous index windows per (t, inventory, price) state.
struct FiniteInstance {
    int horizon = 0;
    std::vector<double> price_states;               // distinct prices
    std::vector<std::vector<double>> transitions;   // [t], row-major S x S
    std::vector<double> control_grid;               // ascending inventory levels
    std::function<double(int, double, double)> payoff;  // (t, h, x)

    struct Window {
        std::int32_t lo = 0;
        std::int32_t hi = -1;  // inclusive target index range; empty when hi < lo
        bool empty() const { return hi < lo; }
    };
    std::vector<Window> actions;  // [(t * NY + iy) * NX + ix]

    std::size_t n_y() const { return control_grid.size(); }
    std::size_t n_x() const { return price_states.size(); }
    const Window& action_set(int t, std::size_t iy, std::size_t ix) const {
        return actions[(static_cast<std::size_t>(t) * n_y() + iy) * n_x() + ix];
    }
    void validate() const;

    std::size_t price_index(double x) const;    // exact match, else throws
    std::size_t control_index(double y) const;  // nearest, throws when far off
};

/// Snaps a continuous problem onto a price chain and a control grid. The
/// admissible moves at (t, y_i, x_k) are the grid points reachable within
/// constraints(t, y_i, x_k); interval endpoints round toward no action.
FiniteInstance discretize(const ControlProblem& problem, std::vector<double> price_states,
                          std::vector<std::vector<double>> transitions,
                          std::vector<double> control_grid);

struct DpResult {
    // value[t][iy * NX + ix] for t = 0..T; best_target holds the optimal
    // inventory index per state (tie toward the smaller |h|)
    std::vector<std::vector<double>> value;
    std::vector<std::vector<std::int32_t>> best_target;
};

DpResult exact_dp(const FiniteInstance& inst);

/// Same supremum computed by exhaustive recursion over the decision tree,
/// with no value tables. Exponential in the horizon; validation sizes only.
double brute_force_value(const FiniteInstance& inst, int t, std::size_t iy, std::size_t ix);

/// Forward-samples the price chain; values are the chain's price states.
PathSet simulate_chain(const FiniteInstance& inst, std::size_t ix0, std::size_t n,
                       std::uint64_t seed);

/// Exact tables as a ValueModel: V from the DP, continuation from the
/// transition-matrix expectation of V_{t+1}.
class OracleValueModel : public ValueModel {
public:
    OracleValueModel(const FiniteInstance& inst, const DpResult& dp);

    int horizon() const override { return inst_->horizon; }
    double value(int t, double y, double x) const override;
    StepEval step(int t, double x, std::uint64_t path_key) const override;

    /// In-place edits for perturbation tests.
    std::vector<std::vector<double>>& mutable_values() { return value_; }
    std::vector<std::vector<double>>& mutable_continuations() { return cont_; }

private:
    const FiniteInstance* inst_;
    std::vector<std::vector<double>> value_;  // copies, so tests can perturb
    std::vector<std::vector<double>> cont_;   // [t][iy * NX + ix], t = 0..T-1
};

/// Runs the tabulated pathwise recursion with the given model over chain
/// paths and returns max |F0| over paths and grid inventories. Exact inputs
/// must produce zero: every Bellman slack term is nonpositive and the
/// optimal action attains it.
double surplus_zero_check(const ControlProblem& problem, const FiniteInstance& inst,
                          const ValueModel& vm, const PathSet& paths);

FiniteInstance read_instance(const std::filesystem::path& file);
void write_instance(const FiniteInstance& inst, const std::filesystem::path& file);

/// Continuous-problem adapter over an instance, for instances loaded from a
/// file without their generating problem.
ControlProblem instance_problem(const FiniteInstance& inst);

}  // namespace storeval
