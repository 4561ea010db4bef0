#pragma once

#include <filesystem>
#include <vector>

#include "storeval/valuemodel.hpp"

namespace storeval {

struct PolicyRun {
    double y0 = 0.0;
    MeanStderr value;                 // V-down and its standard error
    std::vector<double> path_values;  // realized discounted totals per path
    struct TraceRow {
        std::uint32_t path_id;
        int t;
        double y, h, x, payoff;
    };
    std::vector<TraceRow> trace;  // filled only when requested
};

/// Greedy exercise at one node: argmax of H_t(h,x) + continuation(y-h) over
/// the rule's candidates, ties toward the smaller |h|. The argmax is attained
/// on the finite candidate set, so there is no epsilon slack to tune.
double greedy_action(const ControlProblem& problem, int t, double y, double x,
                     const std::function<double(double)>& continuation,
                     const CandidateRule& rule = CandidateRule::bang_bang());

struct PolicyRunConfig {
    CandidateRule rule;
    bool record_trace = false;
};

/// Forward pass of the greedy policy induced by the model's continuation
/// estimate; a lower bound on the value in expectation.
PolicyRun low_biased_estimate(const ControlProblem& problem, const PathSet& paths,
                              const ValueModel& vm, double y0,
                              const PolicyRunConfig& config = {});

/// Monte-Carlo value of an explicit decision function (t, y, x) -> h.
/// Throws naming (t, y, h) when the policy leaves the admissible set.
MeanStderr policy_value(const ControlProblem& problem, const PathSet& paths, double y0,
                        const std::function<double(int, double, double)>& policy);

void write_policy_csv(const std::vector<PolicyRun>& runs, std::size_t n_paths,
                      const std::filesystem::path& file,
                      const std::vector<std::string>& extra_comments = {});
void write_trace_csv(const PolicyRun& run, const std::filesystem::path& file);

}  // namespace storeval
