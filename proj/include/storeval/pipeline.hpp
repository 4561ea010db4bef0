#pragma once

#include <string>
#include <string_view>

#include "storeval/config.hpp"

namespace storeval {

struct BoundReport {
    struct Row {
        double x0 = 0.0;
        double y0 = 0.0;
        double apriori = 0.0;
        double upper = 0.0;
        double upper_stderr = 0.0;
        double lower = 0.0;
        double lower_stderr = 0.0;
        double gap = 0.0;  // upper - lower
    };
    std::vector<Row> rows;
    std::string config_hash;
};

/// Thrown by run_pipeline with the failing stage's name.
struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string stage_name, const std::string& msg)
        : std::runtime_error(msg), stage(std::move(stage_name)) {}
};

std::uint64_t fnv1a(std::string_view text);
std::string hash_hex(std::uint64_t h);

/// Names of the sequential stages, in execution order.
///   simulate -> apriori -> dual -> lowbias -> report
/// Each stage persists its artifacts under `out` and is skipped when a prior
/// run left matching inputs behind (the input hash is stored next to the
/// artifacts). `until` truncates the pipeline after the named stage.
BoundReport run_pipeline(const RunConfig& config, const std::filesystem::path& out,
                         const std::string& until = "report");

/// One plot-ready CSV per initial price: value and bounds against y0.
void emit_figures(const BoundReport& report, const std::filesystem::path& dir);

void write_report_csv(const BoundReport& report, const std::filesystem::path& file);

}  // namespace storeval
