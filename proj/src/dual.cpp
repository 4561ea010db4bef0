#include "storeval/dual.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>

#include "storeval/csv.hpp"
#include "storeval/threading.hpp"

namespace storeval {

double surplus_step(const ControlProblem& problem, int t, double y, double x,
                    const StepEval& eval, const std::function<double(double)>& surplus_next,
                    std::span<const double> candidates, bool* fell_back) {
    const Interval dom = problem.y_domain;
    const double eps = 1e-9 * std::max(1.0, dom.width());
    const double vt = eval.value(y);
    double best = 0.0, best_h = 0.0;
    bool found = false;
    for (double h : candidates) {
        double yhat = y - h;
        if (yhat < dom.lo - eps || yhat > dom.hi + eps) continue;
        yhat = dom.clamp(yhat);
        const double v = problem.payoff(t, h, x) + eval.cont(yhat) - vt + surplus_next(yhat);
        if (!found || v > best || (v == best && std::abs(h) < std::abs(best_h))) {
            best = v;
            best_h = h;
            found = true;
        }
    }
    if (fell_back) *fell_back = !found;
    if (!found) {
        const double yc = dom.clamp(y);
        return problem.payoff(t, 0.0, x) + eval.cont(yc) - vt + surplus_next(yc);
    }
    return best;
}

FitResult fit_surplus_curve(std::span<const double> grid_y, std::span<const double> values,
                            std::shared_ptr<const PatchBasis> phi, const SolveOptions& opts) {
    require(grid_y.size() == values.size(), "fit_surplus_curve: size mismatch");
    std::vector<RegSample> samples(grid_y.size());
    for (std::size_t i = 0; i < grid_y.size(); ++i) samples[i] = {grid_y[i], 0.0, values[i]};
    return fit_surface(std::move(phi), samples, opts);
}

namespace {

// Fixed-design least squares onto phi: the gram over the y grid never
// changes, so it is factorized once and each path reuses the factor.
class YProjector {
public:
    YProjector(std::shared_ptr<const PatchBasis> phi, std::span<const double> grid,
               const SolveOptions& opts)
        : phi_(std::move(phi)) {
        const auto& patches = phi_->patches();
        point_patch_.resize(grid.size());
        point_local_.resize(grid.size());
        std::vector<double> local;
        NormalEquations ne(phi_);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            point_patch_[i] = phi_->eval_local(grid[i], 0.0, local);
            point_local_[i] = local;
            if (point_patch_[i] >= 0)
                ne.add_local(point_patch_[i], local, 0.0);
            else
                ne.add_outside();
        }
        inv_n_ = 1.0 / static_cast<double>(grid.size());
        double trace = 0.0;
        for (std::size_t b = 0; b < ne.block_count(); ++b) {
            const auto g = ne.block_gram(b);
            for (int i = 0; i < ne.block_size(b); ++i) trace += g[i * ne.block_size(b) + i];
        }
        const double ridge = opts.ridge >= 0.0 ? opts.ridge : 1e-10 * trace / phi_->dim();
        for (std::size_t b = 0; b < ne.block_count(); ++b) {
            const int s = ne.block_size(b);
            const auto g = ne.block_gram(b);
            Eigen::MatrixXd a(s, s);
            for (int i = 0; i < s; ++i)
                for (int j = 0; j < s; ++j) a(i, j) = g[i * s + j];
            a += ridge * Eigen::MatrixXd::Identity(s, s);
            factors_.emplace_back(a.ldlt());
            offsets_.push_back(patches[b].offset);
        }
        dim_ = phi_->dim();
    }

    void apply(std::span<const double> values, std::vector<double>& coeffs) const {
        coeffs.assign(dim_, 0.0);
        std::vector<double> moment(dim_, 0.0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const int p = point_patch_[i];
            if (p < 0) continue;
            const int off = offsets_[p];
            const auto& local = point_local_[i];
            for (std::size_t m = 0; m < local.size(); ++m)
                moment[off + m] += values[i] * local[m];
        }
        for (std::size_t b = 0; b < factors_.size(); ++b) {
            const int s = static_cast<int>(factors_[b].rows());
            Eigen::VectorXd rhs(s);
            for (int i = 0; i < s; ++i) rhs(i) = moment[offsets_[b] + i] * inv_n_;
            const Eigen::VectorXd sol = factors_[b].solve(rhs);
            for (int i = 0; i < s; ++i) coeffs[offsets_[b] + i] = sol(i);
        }
    }

    const PatchBasis& phi() const { return *phi_; }

private:
    std::shared_ptr<const PatchBasis> phi_;
    std::vector<int> point_patch_;
    std::vector<std::vector<double>> point_local_;
    std::vector<Eigen::LDLT<Eigen::MatrixXd>> factors_;
    std::vector<int> offsets_;
    double inv_n_ = 0.0;
    int dim_ = 0;
};

struct PayoffAt {
    PayoffSlopes slopes;
    bool fast = false;
    const ControlProblem* problem = nullptr;
    int t = 0;
    double x = 0.0;

    double operator()(double h) const { return fast ? slopes(h) : problem->payoff(t, h, x); }
};

PayoffAt payoff_at(const ControlProblem& problem, int t, double x) {
    PayoffAt p;
    p.problem = &problem;
    p.t = t;
    p.x = x;
    if (problem.payoff_slopes) {
        p.slopes = problem.payoff_slopes(t, x);
        p.fast = true;
    }
    return p;
}

}  // namespace

DualEstimate run_dual(const ControlProblem& problem, const PathSet& paths, const ValueModel& vm,
                      const DualConfig& config) {
    require(vm.horizon() == problem.horizon, "run_dual: model horizon mismatch");
    require(paths.horizon == problem.horizon, "run_dual: path horizon mismatch");
    const int T = problem.horizon;
    const Interval dom = config.y_domain;
    const std::vector<double> grid =
        config.grid.empty() ? linspace(dom.lo, dom.hi, config.n_y) : config.grid;
    const int G = static_cast<int>(grid.size());
    require(std::is_sorted(grid.begin(), grid.end()), "run_dual: y grid must be ascending");
    require(!config.y0.empty(), "run_dual: no report points");
    if (config.impl == DualImpl::curve_fit)
        require(config.phi != nullptr, "run_dual: curve fit needs a phi basis");

    const double x0 = paths.x0(0);
    for (std::size_t i = 1; i < paths.n_paths; ++i)
        require(paths.x0(i) == x0, "run_dual: paths must share the initial price");

    // constraint intervals over the grid; static problems need them once
    const bool static_k = problem.constraint_dep == ConstraintDep::y_only;
    std::vector<Interval> k_static(static_k ? G : 0);
    std::vector<GridWindow> w_static(static_k && config.impl == DualImpl::table ? G : 0);
    if (static_k) {
        for (int k = 0; k < G; ++k) {
            k_static[k] = problem.constraints(0, grid[k], x0);
            if (config.impl == DualImpl::table)
                w_static[k] = admissible_window(grid[k], k_static[k], grid);
        }
    }


    const std::size_t n_y0 = config.y0.size();
    std::vector<int> y0_index(n_y0, -1);  // Impl I report indices
    if (config.impl == DualImpl::table) {
        for (std::size_t q = 0; q < n_y0; ++q) {
            int best = 0;
            for (int j = 1; j < G; ++j)
                if (std::abs(grid[j] - config.y0[q]) < std::abs(grid[best] - config.y0[q]))
                    best = j;
            y0_index[q] = best;
        }
    }

    std::unique_ptr<YProjector> projector;
    if (config.impl == DualImpl::curve_fit)
        projector = std::make_unique<YProjector>(config.phi, grid, config.solve);

    DualEstimate est;
    est.n_paths = paths.n_paths;
    est.path_surplus.assign(n_y0, std::vector<double>(paths.n_paths, 0.0));
    std::atomic<std::size_t> fallbacks{0};

    const double dom_eps = 1e-9 * std::max(1.0, dom.width());

    parallel_chunks(paths.n_paths, 8, [&](std::size_t pb, std::size_t pe) {
        std::vector<double> f_next(G), f_cur(G), contv(G), valv(G);
        std::vector<double> lambda, fbar(G);
        std::vector<Interval> k_local(static_k ? 0 : G);
        std::vector<GridWindow> w_local((static_k || config.impl != DualImpl::table) ? 0 : G);
        std::size_t local_fallbacks = 0;

        for (std::size_t i = pb; i < pe; ++i) {
            const std::uint64_t key = paths.stream_ids[i];
            std::fill(f_next.begin(), f_next.end(), 0.0);
            YSection f_section;  // Impl II: empty section evaluates to 0

            for (int t = T - 1; t >= 0; --t) {
                const double x = paths.at(i, t);
                const StepEval eval = vm.step(t, x, key);
                const PayoffAt pay = payoff_at(problem, t, x);

                const std::vector<Interval>& ks = static_k ? k_static : k_local;
                if (!static_k) {
                    for (int k = 0; k < G; ++k)
                        k_local[k] = problem.constraints(t, grid[k], x);
                }

                if (config.impl == DualImpl::table) {
                    const std::vector<GridWindow>& ws = static_k ? w_static : w_local;
                    if (!static_k) {
                        for (int k = 0; k < G; ++k)
                            w_local[k] = admissible_window(grid[k], ks[k], grid);
                    }
                    for (int j = 0; j < G; ++j) contv[j] = eval.cont(grid[j]);
                    for (int k = 0; k < G; ++k) valv[k] = eval.value(grid[k]);
                    for (int k = 0; k < G; ++k) {
                        const GridWindow w = ws[k];
                        if (w.empty()) {
                            f_cur[k] = pay(0.0) + contv[k] + f_next[k] - valv[k];
                            ++local_fallbacks;
                            continue;
                        }
                        const double yk = grid[k];
                        double best = -std::numeric_limits<double>::infinity();
                        double best_h = 0.0;
                        for (int j = w.lo; j <= w.hi; ++j) {
                            const double h = yk - grid[j];
                            const double v = pay(h) + contv[j] + f_next[j];
                            if (v > best || (v == best && std::abs(h) < std::abs(best_h))) {
                                best = v;
                                best_h = h;
                            }
                        }
                        f_cur[k] = best - valv[k];
                    }
                    std::swap(f_cur, f_next);
                } else {
                    for (int k = 0; k < G; ++k) valv[k] = eval.value(grid[k]);
                    for (int k = 0; k < G; ++k) {
                        const Interval kk = ks[k];
                        const double yk = grid[k];
                        if (kk.empty()) {
                            const double yc = dom.clamp(yk);
                            fbar[k] = pay(0.0) + eval.cont(yc) + f_section(yc) - valv[k];
                            ++local_fallbacks;
                            continue;
                        }
                        const int nh = kk.hi > kk.lo ? config.n_h : 1;
                        const double step = nh > 1 ? kk.width() / (nh - 1) : 0.0;
                        double best = -std::numeric_limits<double>::infinity();
                        double best_h = 0.0;
                        bool found = false;
                        for (int c = 0; c < nh; ++c) {
                            const double h = c + 1 == nh ? kk.hi : kk.lo + step * c;
                            double yhat = yk - h;
                            if (yhat < dom.lo - dom_eps || yhat > dom.hi + dom_eps) continue;
                            yhat = dom.clamp(yhat);
                            const double v = pay(h) + eval.cont(yhat) + f_section(yhat);
                            if (!found || v > best || (v == best && std::abs(h) < std::abs(best_h))) {
                                best = v;
                                best_h = h;
                                found = true;
                            }
                        }
                        if (!found) {
                            const double yc = dom.clamp(yk);
                            best = pay(0.0) + eval.cont(yc) + f_section(yc);
                            ++local_fallbacks;
                        }
                        fbar[k] = best - valv[k];
                    }
                    projector->apply(fbar, lambda);
                    f_section = y_section(projector->phi(), lambda, 0.0);
                }
            }

            for (std::size_t q = 0; q < n_y0; ++q) {
                est.path_surplus[q][i] = config.impl == DualImpl::table
                                             ? f_next[y0_index[q]]
                                             : f_section(config.y0[q]);
            }
        }
        fallbacks.fetch_add(local_fallbacks);
    });

    est.fallback_count = fallbacks.load();
    est.rows.resize(n_y0);
    for (std::size_t q = 0; q < n_y0; ++q) {
        auto& row = est.rows[q];
        row.y0 = config.impl == DualImpl::table ? grid[y0_index[q]] : config.y0[q];
        const MeanStderr ms = mean_stderr(est.path_surplus[q]);
        row.mean_surplus = ms.mean;
        row.stderr_ = ms.stderr_;
        row.value0 = vm.value(0, row.y0, x0);
        row.upper = row.value0 + row.mean_surplus;
    }
    return est;
}

void write_dual_csv(const DualEstimate& est, const std::filesystem::path& file,
                    const std::vector<std::string>& extra_comments) {
    CsvWriter w(file);
    for (const auto& c : extra_comments) w.comment(c);
    w.comment("n_paths: " + std::to_string(est.n_paths));
    w.comment("fallback_steps: " + std::to_string(est.fallback_count));
    w.row("y0,V0,mean_surplus,stderr,V_upper");
    for (const auto& r : est.rows) {
        std::string line = format_double(r.y0, 12);
        line += ',' + format_double(r.value0, 12);
        line += ',' + format_double(r.mean_surplus, 12);
        line += ',' + format_double(r.stderr_, 12);
        line += ',' + format_double(r.upper, 12);
        w.row(line);
    }
}

void write_path_surplus_csv(const DualEstimate& est, const std::filesystem::path& file,
                            const std::vector<std::string>& extra_comments) {
    CsvWriter w(file);
    for (const auto& c : extra_comments) w.comment(c);
    w.row("path_id,y0,surplus");
    for (std::size_t q = 0; q < est.path_surplus.size(); ++q) {
        for (std::size_t i = 0; i < est.path_surplus[q].size(); ++i) {
            std::string line = std::to_string(i);
            line += ',' + format_double(est.rows[q].y0, 12);
            line += ',' + format_double(est.path_surplus[q][i], 12);
            w.row(line);
        }
    }
}

}  // namespace storeval
