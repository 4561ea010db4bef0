#include "storeval/process.hpp"

#include <cmath>
#include <string>

#include "storeval/csv.hpp"
#include "storeval/rng.hpp"
#include "storeval/threading.hpp"

namespace storeval {

void JumpDiffusionParams::validate() const {
    require(alpha >= 0.0, "process: alpha must be >= 0");
    require(gamma_vol >= 0.0, "process: gamma_vol must be >= 0");
    require(sigma2_jump >= 0.0, "process: sigma2_jump must be >= 0");
    require(dt > 0.0, "process: dt must be > 0");
    require(floor >= 0.0, "process: floor must be >= 0");
    const double pj = lambda_jump * dt;
    require(pj >= 0.0 && pj <= 1.0, "process: lambda_jump*dt must lie in [0,1]");
}

double euler_step(double x, const JumpDiffusionParams& p, const EulerShocks& shocks) {
    require(std::isfinite(x), "euler_step: non-finite price");
    require(std::isfinite(shocks.gaussian), "euler_step: non-finite gaussian shock");
    double next = x + p.alpha * (p.beta - x) * p.dt +
                  p.gamma_vol * x * std::sqrt(p.dt) * shocks.gaussian;
    if (shocks.jump) next += shocks.jump_level - x;
    return next < p.floor ? p.floor : next;
}

namespace {

// Shock layout per step: counters 3t, 3t+1, 3t+2 hold the Brownian draw, the
// jump-indicator uniform, and the jump-level draw. The jump level is drawn
// every step whether or not the indicator fires.
double advance(double x, const JumpDiffusionParams& p, const CounterRng& rng, std::uint64_t step) {
    EulerShocks s;
    const std::uint64_t base = 3 * step;
    s.gaussian = rng.gaussian(base);
    s.jump = rng.uniform(base + 1) < p.lambda_jump * p.dt;
    s.jump_level = p.mu_jump + std::sqrt(p.sigma2_jump) * rng.gaussian(base + 2);
    return euler_step(x, p, s);
}

}  // namespace

PathSet simulate_paths(const JumpDiffusionParams& p, double x0, int horizon, std::size_t n,
                       std::uint64_t seed, const std::vector<double>* x0_overrides) {
    p.validate();
    require(n >= 1, "simulate_paths: need n >= 1");
    require(horizon >= 1, "simulate_paths: need horizon >= 1");
    if (x0_overrides)
        require(x0_overrides->size() == n, "simulate_paths: x0 override count mismatch");

    PathSet out;
    out.horizon = horizon;
    out.n_paths = n;
    out.seed = seed;
    out.stream_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.stream_ids[i] = i;
    out.values.assign(n * (horizon + 1), 0.0);

    parallel_chunks(n, 256, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const CounterRng rng(seed, out.stream_ids[i]);
            double x = x0_overrides ? (*x0_overrides)[i] : x0;
            double* row = out.values.data() + i * (horizon + 1);
            row[0] = x;
            for (int t = 0; t < horizon; ++t) {
                x = advance(x, p, rng, static_cast<std::uint64_t>(t));
                row[t + 1] = x;
            }
        }
    });
    return out;
}

std::vector<double> conditional_sample(const JumpDiffusionParams& p, double x, std::size_t count,
                                       std::uint64_t seed) {
    p.validate();
    require(count >= 1, "conditional_sample: need count >= 1");
    const CounterRng rng(seed, 0);
    std::vector<double> out(count);
    for (std::size_t j = 0; j < count; ++j)
        out[j] = advance(x, p, rng, static_cast<std::uint64_t>(j));
    return out;
}

double one_step_mean(const JumpDiffusionParams& p, double x) {
    return x + p.alpha * (p.beta - x) * p.dt + p.lambda_jump * p.dt * (p.mu_jump - x);
}

void write_paths_csv(const PathSet& paths, const std::filesystem::path& file,
                     const std::vector<std::string>& extra_comments) {
    CsvWriter w(file);
    for (const auto& c : extra_comments) w.comment(c);
    w.comment("seed: " + std::to_string(paths.seed));
    w.comment("horizon: " + std::to_string(paths.horizon));
    w.comment("n_paths: " + std::to_string(paths.n_paths));
    w.row("path_id,t,x");
    std::string line;
    for (std::size_t i = 0; i < paths.n_paths; ++i) {
        for (int t = 0; t <= paths.horizon; ++t) {
            line = std::to_string(i);
            line += ',';
            line += std::to_string(t);
            line += ',';
            line += format_double(paths.at(i, t), 12);
            w.row(line);
        }
    }
}

PathSet read_paths_csv(const std::filesystem::path& file) {
    const CsvFile f = read_csv(file);
    PathSet out;
    for (const auto& c : f.comments) {
        const auto pos = c.find(": ");
        if (pos == std::string::npos) continue;
        const std::string key = c.substr(0, pos);
        const std::string value = c.substr(pos + 2);
        if (key == "seed") out.seed = std::stoull(value);
        else if (key == "horizon") out.horizon = std::stoi(value);
        else if (key == "n_paths") out.n_paths = std::stoull(value);
    }
    require(out.horizon >= 1 && out.n_paths >= 1, "paths csv: missing header metadata");
    const std::size_t ip = f.column("path_id"), it = f.column("t"), ix = f.column("x");
    out.values.assign(out.n_paths * (out.horizon + 1), 0.0);
    out.stream_ids.resize(out.n_paths);
    for (std::size_t i = 0; i < out.n_paths; ++i) out.stream_ids[i] = i;
    require(f.rows.size() == out.n_paths * (out.horizon + 1), "paths csv: row count mismatch");
    for (const auto& r : f.rows) {
        const std::size_t path = std::stoull(r[ip]);
        const int t = std::stoi(r[it]);
        out.values[path * (out.horizon + 1) + t] = std::stod(r[ix]);
    }
    return out;
}

}  // namespace storeval
