#include "storeval/apriori.hpp"

#include <cmath>
#include <stdexcept>

#include "storeval/threading.hpp"

namespace storeval {

double terminal_value(const ControlProblem& problem, double y, double x) {
    const Interval k = problem.constraints(problem.horizon, y, x);
    if (k.empty()) throw std::domain_error("terminal_value: empty constraint set");
    double best = problem.payoff(problem.horizon, k.lo, x);
    const double at_hi = problem.payoff(problem.horizon, k.hi, x);
    if (at_hi > best) best = at_hi;
    if (k.lo < 0.0 && k.hi > 0.0) best = std::max(best, problem.payoff(problem.horizon, 0.0, x));
    return best;
}

OptimizeResult optimize_step(const ControlProblem& problem, int t, double y, double x,
                             const std::function<double(double)>& continuation,
                             const CandidateRule& rule, std::vector<double>& scratch) {
    const Interval k = problem.constraints(t, y, x);
    rule.collect(y, k, scratch);
    const Interval dom = problem.y_domain;
    const double eps = 1e-9 * std::max(1.0, dom.width());

    OptimizeResult best;
    bool found = false;
    for (double h : scratch) {
        double yhat = y - h;
        if (yhat < dom.lo - eps || yhat > dom.hi + eps) continue;
        yhat = dom.clamp(yhat);
        const double v = problem.payoff(t, h, x) + continuation(yhat);
        if (!found || v > best.value ||
            (v == best.value && std::abs(h) < std::abs(best.h))) {
            best.h = h;
            best.value = v;
            found = true;
        }
    }
    if (!found) {
        best.h = 0.0;
        best.value = problem.payoff(t, 0.0, x) + continuation(dom.clamp(y));
        best.fell_back = true;
    }
    return best;
}

OptimizeResult bangbang_optimize(const ControlProblem& problem, int t, double y, double x,
                                 const Surface& ghat, const CandidateRule& rule) {
    std::vector<double> scratch;
    return optimize_step(
        problem, t, y, x, [&](double yhat) { return ghat.eval(yhat, x); }, rule, scratch);
}

FitResult regress_continuation(std::shared_ptr<const PatchBasis> basis,
                               std::span<const RegSample> next_values,
                               const SolveOptions& opts) {
    return fit_surface(std::move(basis), next_values, opts);
}

double SurfaceStack::value_at(int t, double y, double x) const {
    if (t >= horizon) return terminal(y, x);
    return value[t].eval(y, x);
}

double SurfaceStack::residual_bound() const {
    double sum = 0.0;
    for (const auto& d : diagnostics) sum += d.vfit_max_residual;
    return sum;
}

SurfaceStack run_apriori(const ControlProblem& problem, const PathSet& paths,
                         std::shared_ptr<const PatchBasis> basis, const AprioriConfig& config) {
    require(paths.horizon == problem.horizon, "run_apriori: path horizon mismatch");
    const int T = problem.horizon;

    SurfaceStack stack;
    stack.horizon = T;
    stack.value.resize(T);
    stack.continuation.resize(T);
    stack.diagnostics.resize(T);
    stack.terminal = [pb = problem](double y, double x) { return terminal_value(pb, y, x); };

    GridYX grid_next = build_yx_grid(paths, T, config.n_y, config.y_domain, config.lattice_seed,
                                     config.lattice_generator);
    std::vector<RegSample> samples(grid_next.entries.size());
    std::vector<double> vbar(grid_next.entries.size());

    for (int t = T - 1; t >= 0; --t) {
        // continuation regression: feature price is x_t, target is the
        // time-(t+1) value at the same path's next price
        parallel_chunks(grid_next.entries.size(), 4096, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto& entry = grid_next.entries[i];
                samples[i].y = entry.y;
                samples[i].x = paths.at(entry.path_id, t);
                samples[i].target = stack.value_at(t + 1, entry.y, entry.x);
            }
        });
        FitResult ghat = regress_continuation(basis, samples, config.solve);

        GridYX grid_t = build_yx_grid(paths, t, config.n_y, config.y_domain, config.lattice_seed,
                                      config.lattice_generator);

        // per-step optimization at every grid node; paths share a section of
        // Ghat at their time-t price, so work in path-sized blocks
        vbar.resize(grid_t.entries.size());
        parallel_chunks(paths.n_paths, 64, [&](std::size_t pb, std::size_t pe) {
            std::vector<double> scratch;
            for (std::size_t p = pb; p < pe; ++p) {
                const double x = paths.at(p, t);
                const YSection section = ghat.surface.section(x);
                auto cont = [&section](double yhat) { return section(yhat); };
                for (std::size_t j = 0; j < config.n_y; ++j) {
                    const std::size_t idx = p * config.n_y + j;
                    const auto& entry = grid_t.entries[idx];
                    vbar[idx] =
                        optimize_step(problem, t, entry.y, x, cont, config.rule, scratch).value;
                }
            }
        });

        samples.resize(grid_t.entries.size());
        for (std::size_t i = 0; i < grid_t.entries.size(); ++i) {
            samples[i].y = grid_t.entries[i].y;
            samples[i].x = grid_t.entries[i].x;
            samples[i].target = vbar[i];
        }
        FitResult vfit = fit_surface(basis, samples, config.solve);

        auto& diag = stack.diagnostics[t];
        diag.t = t;
        diag.ghat_rank_deficient = ghat.info.rank_deficient;
        diag.vfit_rank_deficient = vfit.info.rank_deficient;
        diag.vfit_max_residual = vfit.max_abs_residual;
        diag.ghat_ridge = ghat.info.ridge_used;

        stack.continuation[t] = std::move(ghat.surface);
        stack.value[t] = std::move(vfit.surface);
        grid_next = std::move(grid_t);
    }
    return stack;
}

void write_stack(const SurfaceStack& stack, const std::filesystem::path& dir,
                 const std::vector<std::string>& comments) {
    std::filesystem::create_directories(dir);
    for (int t = 0; t < stack.horizon; ++t) {
        write_surface_csv(stack.value[t], dir / ("V_" + std::to_string(t) + ".csv"), comments);
        write_surface_csv(stack.continuation[t], dir / ("G_" + std::to_string(t) + ".csv"),
                          comments);
    }
}

SurfaceStack read_stack(const ControlProblem& problem, std::shared_ptr<const PatchBasis> basis,
                        const std::filesystem::path& dir) {
    SurfaceStack stack;
    stack.horizon = problem.horizon;
    stack.value.resize(problem.horizon);
    stack.continuation.resize(problem.horizon);
    stack.terminal = [pb = problem](double y, double x) { return terminal_value(pb, y, x); };
    for (int t = 0; t < problem.horizon; ++t) {
        stack.value[t] = read_surface_csv(basis, dir / ("V_" + std::to_string(t) + ".csv"));
        stack.continuation[t] = read_surface_csv(basis, dir / ("G_" + std::to_string(t) + ".csv"));
    }
    return stack;
}

}  // namespace storeval
