#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "storeval/apriori.hpp"

namespace storeval {

/// Evaluators for fixed (t, x), consumed by the pathwise recursion and the
/// greedy policy. Surface-backed models carry flattened y-sections; table or
/// oracle models fall back to the generic closures.
struct StepEval {
    std::optional<YSection> value_section;
    std::optional<YSection> cont_section;
    std::function<double(double)> value_fn;
    std::function<double(double)> cont_fn;

    double value(double y) const { return value_section ? (*value_section)(y) : value_fn(y); }
    double cont(double y) const { return cont_section ? (*cont_section)(y) : cont_fn(y); }
};

/// Time-indexed access to an approximate value function and to an estimate of
/// the one-step continuation E[V_{t+1}(y, X_{t+1}) | X_t = x].
class ValueModel {
public:
    virtual ~ValueModel() = default;
    virtual int horizon() const = 0;
    virtual double value(int t, double y, double x) const = 0;
    /// t must lie in [0, horizon-1]. path_key seeds any fresh draws so that
    /// results are reproducible and independent across paths.
    virtual StepEval step(int t, double x, std::uint64_t path_key) const = 0;
};

enum class ContinuationMode { regressed, nested };

/// Nested continuation: L fresh one-step samples averaged through V_{t+1}.
/// Unlike the regressed surface this has zero-mean increments by
/// construction, which is what makes the dual estimate a statistically valid
/// upper bound.
struct NestedSpec {
    JumpDiffusionParams process;
    std::size_t sample_count = 64;
    std::uint64_t seed = 0;
};

class SurfaceValueModel : public ValueModel {
public:
    /// The stack must outlive the model. nested is required in nested mode.
    SurfaceValueModel(const SurfaceStack& stack, ContinuationMode mode,
                      std::optional<NestedSpec> nested = std::nullopt);

    int horizon() const override { return stack_->horizon; }
    double value(int t, double y, double x) const override { return stack_->value_at(t, y, x); }
    StepEval step(int t, double x, std::uint64_t path_key) const override;

    ContinuationMode mode() const { return mode_; }

private:
    const SurfaceStack* stack_;
    ContinuationMode mode_;
    std::optional<NestedSpec> nested_;
};

/// Seed for the conditional draws behind G-tilde at (path, t).
std::uint64_t nested_draw_seed(std::uint64_t seed, std::uint64_t path_key, int t);

/// Direct evaluation of the nested estimate G-tilde_t(y, x) from L fresh
/// conditional samples keyed by draw_key.
double nested_continuation(const SurfaceStack& stack, const NestedSpec& spec, int t, double y,
                           double x, std::uint64_t draw_key);

}  // namespace storeval
