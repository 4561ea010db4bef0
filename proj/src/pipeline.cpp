#include "storeval/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "storeval/apriori.hpp"
#include "storeval/csv.hpp"
#include "storeval/policy.hpp"
#include "storeval/rng.hpp"

namespace storeval {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

using nlohmann::json;

// stage seeds derived from the master seed; fixed salts keep them stable
// across runs and independent across stages
constexpr std::uint64_t kSaltPaths = 0xA11A;
constexpr std::uint64_t kSaltLattice = 0x1A77;
constexpr std::uint64_t kSaltDual = 0xD0A1;
constexpr std::uint64_t kSaltNested = 0x7E57;
constexpr std::uint64_t kSaltPolicy = 0x9011;

std::string d17(double v) { return format_double(v, 17); }

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) {
        s += d17(x);
        s += ';';
    }
    return s;
}

std::string canonical_process(const RunConfig& c) {
    std::ostringstream s;
    s << "process:" << d17(c.process.alpha) << ',' << d17(c.process.beta) << ','
      << d17(c.process.gamma_vol) << ',' << d17(c.process.lambda_jump) << ','
      << d17(c.process.mu_jump) << ',' << d17(c.process.sigma2_jump) << ',' << d17(c.process.dt)
      << ',' << d17(c.process.floor);
    return s.str();
}

std::string canonical_problem(const RunConfig& c) {
    std::ostringstream s;
    s << "problem:" << c.problem_kind << ':';
    if (c.problem_kind == "gas") {
        s << d17(c.gas.y_max) << ',' << d17(c.gas.y_base) << ',' << d17(c.gas.c_max_at_full) << ','
          << d17(c.gas.c_min_at_empty) << ',' << d17(c.gas.loss_rate) << ',' << d17(c.gas.r_annual)
          << ',' << d17(c.gas.dt) << ',' << d17(c.gas.volume_scale) << ',' << c.gas.horizon;
    } else if (c.problem_kind == "swing") {
        s << d17(c.swing.strike) << ',' << d17(c.swing.m_daily) << ',' << d17(c.swing.M_daily)
          << ',' << d17(c.swing.cum_min) << ',' << d17(c.swing.cum_max) << ',' << c.swing.horizon;
    } else {
        s << c.instance_file.string();
    }
    return s.str();
}

std::string canonical_basis(const RunConfig& c) {
    std::ostringstream s;
    s << "basis:" << join(c.basis.y_edges) << '|' << join(c.basis.x_edges) << '|';
    for (const auto& m : c.basis.monomials) s << m.py << 'y' << m.px << "x,";
    s << '|' << c.basis.extra_x_row << '|';
    for (const auto& m : c.basis.extra_monomials) s << m.py << 'y' << m.px << "x,";
    return s.str();
}

int problem_horizon(const RunConfig& c) {
    return c.problem_kind == "gas" ? c.gas.horizon : c.swing.horizon;
}

struct StageIo {
    std::filesystem::path dir;
    std::string hash;
    std::uint64_t seed = 0;

    std::vector<std::string> comments() const {
        return {"config_hash: " + hash, "stage_seed: " + std::to_string(seed)};
    }
};

bool stage_cached(const StageIo& io, const std::vector<std::string>& artifacts) {
    const auto meta_path = io.dir / "meta.json";
    std::ifstream in(meta_path);
    if (!in) return false;
    json meta;
    try {
        in >> meta;
    } catch (...) {
        return false;
    }
    if (meta.value("input_hash", "") != io.hash) return false;
    for (const auto& a : artifacts)
        if (!std::filesystem::exists(io.dir / a)) return false;
    return true;
}

void write_stage_meta(const StageIo& io, json extra = {}) {
    std::filesystem::create_directories(io.dir);
    json meta = std::move(extra);
    meta["input_hash"] = io.hash;
    meta["stage_seed"] = io.seed;
    std::ofstream out(io.dir / "meta.json");
    out << meta.dump(2) << "\n";
}

}  // namespace

BoundReport run_pipeline(const RunConfig& config, const std::filesystem::path& out,
                         const std::string& until) {
    require(until == "simulate" || until == "apriori" || until == "dual" || until == "lowbias" ||
                until == "report",
            "pipeline: unknown stage '" + until + "'");
    if (config.problem_kind == "finite")
        throw StageError("simulate", "finite instances run through oracle-check, not the pipeline");
    std::filesystem::create_directories(out);

    BoundReport report;
    const int T = problem_horizon(config);

    // ---- simulate: one path per initial-price grid point -------------------
    const std::string sim_hash = hash_hex(
        fnv1a(canonical_process(config) + "|x0:" +
              [&] {
                  std::string s;
                  for (const auto& seg : config.x0_segments)
                      s += d17(seg.range.lo) + ':' + d17(seg.range.hi) + ':' +
                           std::to_string(seg.count) + ',';
                  return s;
              }() +
              "|T:" + std::to_string(T) + "|seed:" + std::to_string(config.master_seed)));
    StageIo sim_io{out / "simulate", sim_hash, stream_key(config.master_seed, kSaltPaths)};

    PathSet apriori_paths;
    try {
        require(!config.x0_segments.empty(), "[grid] x0_segments is required");
        const auto x0_grid = initial_price_grid(config.x0_segments);
        // paths are cheap to regenerate bit-exactly from the seed, so a cache
        // hit skips only the csv rewrite
        apriori_paths = simulate_paths(config.process, 0.0, T, x0_grid.size(), sim_io.seed,
                                       &x0_grid);
        if (!stage_cached(sim_io, {"paths.csv"})) {
            std::filesystem::create_directories(sim_io.dir);
            write_paths_csv(apriori_paths, sim_io.dir / "paths.csv", sim_io.comments());
            write_stage_meta(sim_io, {{"n_paths", apriori_paths.n_paths}});
        }
    } catch (const std::exception& e) {
        throw StageError("simulate", e.what());
    }
    if (until == "simulate") return report;

    // ---- apriori: backward-induction value and continuation surfaces -------
    const std::string apriori_hash =
        hash_hex(fnv1a(sim_hash + '|' + canonical_problem(config) + '|' + canonical_basis(config) +
                       "|ny:" + std::to_string(config.apriori_n_y) +
                       "|gen:" + std::to_string(config.lattice_generator) +
                       "|cand:" + config.apriori_candidates +
                       "|dom:" + d17(config.y_domain.lo) + ':' + d17(config.y_domain.hi)));
    StageIo ap_io{out / "apriori", apriori_hash, stream_key(config.master_seed, kSaltLattice)};

    ControlProblem problem;
    std::shared_ptr<const PatchBasis> basis;
    SurfaceStack stack;
    try {
        problem = config.build_problem();
        basis = config.build_basis();
        std::vector<std::string> artifacts;
        for (int t = 0; t < T; ++t) {
            artifacts.push_back("V_" + std::to_string(t) + ".csv");
            artifacts.push_back("G_" + std::to_string(t) + ".csv");
        }
        if (stage_cached(ap_io, artifacts)) {
            stack = read_stack(problem, basis, ap_io.dir);
        } else {
            AprioriConfig ac;
            ac.n_y = config.apriori_n_y;
            ac.y_domain = config.y_domain;
            ac.lattice_seed = ap_io.seed;
            ac.lattice_generator = config.lattice_generator;
            ac.rule = config.apriori_rule();
            stack = run_apriori(problem, apriori_paths, basis, ac);
            write_stack(stack, ap_io.dir, ap_io.comments());
            json diag;
            diag["residual_bound"] = stack.residual_bound();
            int deficient = 0;
            for (const auto& d : stack.diagnostics)
                deficient += d.ghat_rank_deficient || d.vfit_rank_deficient;
            diag["rank_deficient_steps"] = deficient;
            write_stage_meta(ap_io, std::move(diag));
        }
    } catch (const std::exception& e) {
        throw StageError("apriori", e.what());
    }
    if (until == "apriori") return report;

    // ---- dual + lowbias per initial price ----------------------------------
    const std::string dual_base =
        apriori_hash + "|impl:" + (config.dual_impl == DualImpl::table ? "table" : "curve_fit") +
        "|ny:" + std::to_string(config.dual_n_y) + "|nh:" + std::to_string(config.dual_n_h) +
        "|phi:" + join(config.phi_edges) + ':' + std::to_string(config.phi_degree) +
        "|N:" + std::to_string(config.dual_paths) +
        "|mode:" + (config.cont_mode == ContinuationMode::nested ? "nested" : "regressed") +
        "|L:" + std::to_string(config.nested_l) + "|y0:" + join(config.y0_grid);

    for (std::size_t xi = 0; xi < config.x0_values.size(); ++xi) {
        const double x0 = config.x0_values[xi];
        const std::string tag = "x0_" + format_double(x0, 12);

        StageIo dual_io{out / "dual" / tag, hash_hex(fnv1a(dual_base + "|x0:" + d17(x0))),
                        stream_key(config.master_seed, kSaltDual + xi)};
        try {
            if (!stage_cached(dual_io, {"estimate.csv", "path_surplus.csv"})) {
                const PathSet dual_paths =
                    simulate_paths(config.process, x0, T, config.dual_paths, dual_io.seed);
                std::optional<NestedSpec> nested;
                if (config.cont_mode == ContinuationMode::nested)
                    nested = NestedSpec{config.process, config.nested_l,
                                        stream_key(config.master_seed, kSaltNested + xi)};
                const SurfaceValueModel vm(stack, config.cont_mode, nested);
                DualConfig dc;
                dc.impl = config.dual_impl;
                dc.n_y = config.dual_n_y;
                dc.y_domain = config.y_domain;
                dc.n_h = config.dual_n_h;
                dc.phi = config.build_phi();
                dc.y0 = config.y0_grid;
                const DualEstimate est = run_dual(problem, dual_paths, vm, dc);
                write_dual_csv(est, dual_io.dir / "estimate.csv", dual_io.comments());
                write_path_surplus_csv(est, dual_io.dir / "path_surplus.csv", dual_io.comments());
                write_paths_csv(dual_paths, dual_io.dir / "paths.csv", dual_io.comments());
                write_stage_meta(dual_io, {{"x0", x0}, {"fallback_steps", est.fallback_count}});
            }
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError("dual", e.what());
        }
        if (until == "dual") continue;

        StageIo pol_io{out / "lowbias" / tag,
                       hash_hex(fnv1a(apriori_hash + "|policy:" +
                                      std::to_string(config.policy_paths) + "|y0:" +
                                      join(config.y0_grid) + "|x0:" + d17(x0))),
                       stream_key(config.master_seed, kSaltPolicy + xi)};
        try {
            if (!stage_cached(pol_io, {"policy.csv"})) {
                const PathSet pol_paths =
                    simulate_paths(config.process, x0, T, config.policy_paths, pol_io.seed);
                const SurfaceValueModel vm(stack, ContinuationMode::regressed);
                std::vector<PolicyRun> runs;
                for (double y0 : config.y0_grid)
                    runs.push_back(low_biased_estimate(problem, pol_paths, vm, y0, {}));
                write_policy_csv(runs, pol_paths.n_paths, pol_io.dir / "policy.csv",
                                 pol_io.comments());
                write_paths_csv(pol_paths, pol_io.dir / "paths.csv", pol_io.comments());
                write_stage_meta(pol_io, {{"x0", x0}});
            }
        } catch (const std::exception& e) {
            throw StageError("lowbias", e.what());
        }
    }
    if (until == "dual" || until == "lowbias") return report;

    // ---- report: join the persisted stage outputs --------------------------
    try {
        report.config_hash = hash_hex(fnv1a(dual_base));
        for (const double x0 : config.x0_values) {
            const std::string tag = "x0_" + format_double(x0, 12);
            const CsvFile dual_csv = read_csv(out / "dual" / tag / "estimate.csv");
            const CsvFile pol_csv = read_csv(out / "lowbias" / tag / "policy.csv");
            require(dual_csv.rows.size() == pol_csv.rows.size(),
                    "report: stage outputs disagree on the y0 grid");
            const std::size_t dy = dual_csv.column("y0"), dv = dual_csv.column("V0"),
                              ds = dual_csv.column("stderr"), du = dual_csv.column("V_upper");
            const std::size_t pm = pol_csv.column("mean"), ps = pol_csv.column("stderr");
            for (std::size_t i = 0; i < dual_csv.rows.size(); ++i) {
                BoundReport::Row row;
                row.x0 = x0;
                row.y0 = std::stod(dual_csv.rows[i][dy]);
                row.apriori = std::stod(dual_csv.rows[i][dv]);
                row.upper = std::stod(dual_csv.rows[i][du]);
                row.upper_stderr = std::stod(dual_csv.rows[i][ds]);
                row.lower = std::stod(pol_csv.rows[i][pm]);
                row.lower_stderr = std::stod(pol_csv.rows[i][ps]);
                row.gap = row.upper - row.lower;
                report.rows.push_back(row);
            }
        }
        const auto report_dir = out / "report";
        write_report_csv(report, report_dir / "bound_report.csv");
        emit_figures(report, report_dir);
    } catch (const std::exception& e) {
        throw StageError("report", e.what());
    }
    return report;
}

void write_report_csv(const BoundReport& report, const std::filesystem::path& file) {
    CsvWriter w(file);
    w.comment("config_hash: " + report.config_hash);
    w.row("x0,y0,apriori,upper,upper_stderr,lower,lower_stderr,gap");
    for (const auto& r : report.rows) {
        std::string line = format_double(r.x0, 12);
        line += ',' + format_double(r.y0, 12);
        line += ',' + format_double(r.apriori, 12);
        line += ',' + format_double(r.upper, 12);
        line += ',' + format_double(r.upper_stderr, 12);
        line += ',' + format_double(r.lower, 12);
        line += ',' + format_double(r.lower_stderr, 12);
        line += ',' + format_double(r.gap, 12);
        w.row(line);
    }
}

void emit_figures(const BoundReport& report, const std::filesystem::path& dir) {
    std::vector<double> x0s;
    for (const auto& r : report.rows)
        if (std::find(x0s.begin(), x0s.end(), r.x0) == x0s.end()) x0s.push_back(r.x0);
    for (double x0 : x0s) {
        CsvWriter w(dir / ("figure_x0_" + format_double(x0, 12) + ".csv"));
        w.comment("config_hash: " + report.config_hash);
        w.comment("x0: " + format_double(x0, 12));
        w.row("y0,apriori,upper,upper_stderr,lower,lower_stderr");
        for (const auto& r : report.rows) {
            if (r.x0 != x0) continue;
            std::string line = format_double(r.y0, 12);
            line += ',' + format_double(r.apriori, 12);
            line += ',' + format_double(r.upper, 12);
            line += ',' + format_double(r.upper_stderr, 12);
            line += ',' + format_double(r.lower, 12);
            line += ',' + format_double(r.lower_stderr, 12);
            w.row(line);
        }
    }
}

}  // namespace storeval
