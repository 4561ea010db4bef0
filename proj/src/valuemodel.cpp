#include "storeval/valuemodel.hpp"

#include "storeval/rng.hpp"

namespace storeval {

SurfaceValueModel::SurfaceValueModel(const SurfaceStack& stack, ContinuationMode mode,
                                     std::optional<NestedSpec> nested)
    : stack_(&stack), mode_(mode), nested_(std::move(nested)) {
    require(mode_ == ContinuationMode::regressed || nested_.has_value(),
            "value model: nested mode needs a NestedSpec");
}

std::uint64_t nested_draw_seed(std::uint64_t seed, std::uint64_t path_key, int t) {
    return stream_key(seed, mix64(path_key) + static_cast<std::uint64_t>(t));
}

StepEval SurfaceValueModel::step(int t, double x, std::uint64_t path_key) const {
    require(t >= 0 && t < stack_->horizon, "value model: step index out of range");
    StepEval eval;
    eval.value_section = stack_->value[t].section(x);
    if (mode_ == ContinuationMode::regressed) {
        eval.cont_section = stack_->continuation[t].section(x);
        return eval;
    }
    const auto samples = conditional_sample(nested_->process, x, nested_->sample_count,
                                            nested_draw_seed(nested_->seed, path_key, t));
    if (t + 1 < stack_->horizon) {
        const Surface& next = stack_->value[t + 1];
        eval.cont_section = y_section_mixture(*next.basis, next.coeffs, samples);
    } else {
        // terminal values have no surface; average them directly
        eval.cont_fn = [this, samples = std::move(samples)](double y) {
            double sum = 0.0;
            for (double xs : samples) sum += stack_->terminal(y, xs);
            return sum / static_cast<double>(samples.size());
        };
    }
    return eval;
}

double nested_continuation(const SurfaceStack& stack, const NestedSpec& spec, int t, double y,
                           double x, std::uint64_t draw_key) {
    const auto samples =
        conditional_sample(spec.process, x, spec.sample_count, draw_key);
    double sum = 0.0;
    for (double xs : samples) sum += stack.value_at(t + 1, y, xs);
    return sum / static_cast<double>(samples.size());
}

}  // namespace storeval
