#include "storeval/policy.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "storeval/csv.hpp"
#include "storeval/threading.hpp"

namespace storeval {

double greedy_action(const ControlProblem& problem, int t, double y, double x,
                     const std::function<double(double)>& continuation,
                     const CandidateRule& rule) {
    std::vector<double> scratch;
    const OptimizeResult r = optimize_step(problem, t, y, x, continuation, rule, scratch);
    if (r.fell_back)
        throw std::runtime_error("greedy_action: no admissible candidate at t=" +
                                 std::to_string(t) + " y=" + std::to_string(y));
    return r.h;
}

PolicyRun low_biased_estimate(const ControlProblem& problem, const PathSet& paths,
                              const ValueModel& vm, double y0, const PolicyRunConfig& config) {
    require(paths.horizon == problem.horizon, "low_biased_estimate: path horizon mismatch");
    require(problem.y0_domain.contains(y0), "low_biased_estimate: y0 outside the initial domain");
    const int T = problem.horizon;

    PolicyRun run;
    run.y0 = y0;
    run.path_values.assign(paths.n_paths, 0.0);
    std::mutex trace_mutex;

    parallel_chunks(paths.n_paths, 64, [&](std::size_t pb, std::size_t pe) {
        std::vector<double> scratch;
        std::vector<PolicyRun::TraceRow> local_trace;
        const auto zero_cont = [](double) { return 0.0; };
        for (std::size_t i = pb; i < pe; ++i) {
            double y = y0;
            double total = 0.0;
            for (int t = 0; t <= T; ++t) {
                const double x = paths.at(i, t);
                OptimizeResult r;
                if (t < T) {
                    const StepEval eval = vm.step(t, x, paths.stream_ids[i]);
                    r = optimize_step(
                        problem, t, y, x, [&eval](double yhat) { return eval.cont(yhat); },
                        config.rule, scratch);
                } else {
                    r = optimize_step(problem, t, y, x, zero_cont, config.rule, scratch);
                }
                if (r.fell_back)
                    throw std::runtime_error("low_biased_estimate: infeasible step at t=" +
                                             std::to_string(t) + " y=" + std::to_string(y));
                const double pay = problem.payoff(t, r.h, x);
                total += pay;
                if (config.record_trace)
                    local_trace.push_back({static_cast<std::uint32_t>(i), t, y, r.h, x, pay});
                y -= r.h;
            }
            run.path_values[i] = total;
        }
        if (config.record_trace && !local_trace.empty()) {
            std::lock_guard lock(trace_mutex);
            run.trace.insert(run.trace.end(), local_trace.begin(), local_trace.end());
        }
    });

    if (config.record_trace) {
        std::sort(run.trace.begin(), run.trace.end(),
                  [](const PolicyRun::TraceRow& a, const PolicyRun::TraceRow& b) {
                      return a.path_id != b.path_id ? a.path_id < b.path_id : a.t < b.t;
                  });
    }
    run.value = mean_stderr(run.path_values);
    return run;
}

MeanStderr policy_value(const ControlProblem& problem, const PathSet& paths, double y0,
                        const std::function<double(int, double, double)>& policy) {
    const int T = problem.horizon;
    std::vector<double> totals(paths.n_paths, 0.0);
    parallel_chunks(paths.n_paths, 64, [&](std::size_t pb, std::size_t pe) {
        for (std::size_t i = pb; i < pe; ++i) {
            double y = y0;
            double total = 0.0;
            for (int t = 0; t <= T; ++t) {
                const double x = paths.at(i, t);
                const double h = policy(t, y, x);
                const Interval k = problem.constraints(t, y, x);
                if (k.empty() || h < k.lo - 1e-12 || h > k.hi + 1e-12)
                    throw std::runtime_error("policy_value: inadmissible decision at t=" +
                                             std::to_string(t) + " y=" + std::to_string(y) +
                                             " h=" + std::to_string(h));
                total += problem.payoff(t, h, x);
                y -= h;
            }
            totals[i] = total;
        }
    });
    return mean_stderr(totals);
}

void write_policy_csv(const std::vector<PolicyRun>& runs, std::size_t n_paths,
                      const std::filesystem::path& file,
                      const std::vector<std::string>& extra_comments) {
    CsvWriter w(file);
    for (const auto& c : extra_comments) w.comment(c);
    w.row("y0,mean,stderr,n_paths");
    for (const auto& r : runs) {
        std::string line = format_double(r.y0, 12);
        line += ',' + format_double(r.value.mean, 12);
        line += ',' + format_double(r.value.stderr_, 12);
        line += ',' + std::to_string(n_paths);
        w.row(line);
    }
}

void write_trace_csv(const PolicyRun& run, const std::filesystem::path& file) {
    CsvWriter w(file);
    w.row("path_id,t,y,h,x,payoff");
    for (const auto& r : run.trace) {
        std::string line = std::to_string(r.path_id);
        line += ',' + std::to_string(r.t);
        line += ',' + format_double(r.y, 12);
        line += ',' + format_double(r.h, 12);
        line += ',' + format_double(r.x, 12);
        line += ',' + format_double(r.payoff, 12);
        w.row(line);
    }
}

}  // namespace storeval
