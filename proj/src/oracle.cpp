#include "storeval/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "storeval/csv.hpp"
#include "storeval/rng.hpp"

namespace storeval {

void FiniteInstance::validate() const {
    require(horizon >= 1, "instance: horizon must be >= 1");
    require(!price_states.empty() && !control_grid.empty(), "instance: empty state sets");
    require(std::is_sorted(control_grid.begin(), control_grid.end()),
            "instance: control grid must be ascending");
    for (std::size_t i = 0; i < price_states.size(); ++i)
        for (std::size_t j = i + 1; j < price_states.size(); ++j)
            require(price_states[i] != price_states[j], "instance: duplicate price states");
    require(transitions.size() == static_cast<std::size_t>(horizon),
            "instance: need one transition matrix per step");
    const std::size_t s = n_x();
    for (const auto& m : transitions) {
        require(m.size() == s * s, "instance: transition size mismatch");
        for (std::size_t i = 0; i < s; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < s; ++j) {
                require(m[i * s + j] >= 0.0, "instance: negative transition probability");
                sum += m[i * s + j];
            }
            require(std::abs(sum - 1.0) <= 1e-12, "instance: transition row must sum to 1");
        }
    }
    require(actions.size() == static_cast<std::size_t>(horizon + 1) * n_y() * n_x(),
            "instance: action table size mismatch");
    for (const auto& w : actions)
        if (!w.empty())
            require(w.lo >= 0 && w.hi < static_cast<std::int32_t>(n_y()),
                    "instance: action window out of range");
}

std::size_t FiniteInstance::price_index(double x) const {
    const double tol = 1e-9 * (1.0 + std::abs(x));
    for (std::size_t i = 0; i < price_states.size(); ++i)
        if (std::abs(price_states[i] - x) <= tol) return i;
    throw std::domain_error("instance: price not a chain state");
}

std::size_t FiniteInstance::control_index(double y) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < control_grid.size(); ++i)
        if (std::abs(control_grid[i] - y) < std::abs(control_grid[best] - y)) best = i;
    const double span = control_grid.back() - control_grid.front();
    if (std::abs(control_grid[best] - y) > 1e-6 * (1.0 + span))
        throw std::domain_error("instance: inventory too far from the control grid");
    return best;
}

FiniteInstance discretize(const ControlProblem& problem, std::vector<double> price_states,
                          std::vector<std::vector<double>> transitions,
                          std::vector<double> control_grid) {
    FiniteInstance inst;
    inst.horizon = problem.horizon;
    inst.price_states = std::move(price_states);
    inst.transitions = std::move(transitions);
    inst.control_grid = std::move(control_grid);
    inst.payoff = problem.payoff;
    const std::size_t ny = inst.n_y(), nx = inst.n_x();
    inst.actions.resize((inst.horizon + 1) * ny * nx);
    for (int t = 0; t <= inst.horizon; ++t) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const Interval k =
                    problem.constraints(t, inst.control_grid[iy], inst.price_states[ix]);
                const GridWindow w =
                    admissible_window(inst.control_grid[iy], k, inst.control_grid);
                inst.actions[(static_cast<std::size_t>(t) * ny + iy) * nx + ix] = {w.lo, w.hi};
            }
        }
    }
    inst.validate();
    return inst;
}

DpResult exact_dp(const FiniteInstance& inst) {
    inst.validate();
    const std::size_t ny = inst.n_y(), nx = inst.n_x();
    const int T = inst.horizon;
    DpResult dp;
    dp.value.assign(T + 1, std::vector<double>(ny * nx, 0.0));
    dp.best_target.assign(T + 1, std::vector<std::int32_t>(ny * nx, -1));

    for (int t = T; t >= 0; --t) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const double y = inst.control_grid[iy];
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const double x = inst.price_states[ix];
                const auto& w = inst.action_set(t, iy, ix);
                if (w.empty()) throw std::domain_error("exact_dp: empty action set");
                double best = -std::numeric_limits<double>::infinity();
                double best_h = 0.0;
                std::int32_t best_j = -1;
                for (std::int32_t j = w.lo; j <= w.hi; ++j) {
                    const double h = y - inst.control_grid[j];
                    double v = inst.payoff(t, h, x);
                    if (t < T) {
                        const auto& p = inst.transitions[t];
                        double ev = 0.0;
                        for (std::size_t l = 0; l < nx; ++l)
                            ev += p[ix * nx + l] * dp.value[t + 1][j * nx + l];
                        v += ev;
                    }
                    if (best_j < 0 || v > best || (v == best && std::abs(h) < std::abs(best_h))) {
                        best = v;
                        best_h = h;
                        best_j = j;
                    }
                }
                dp.value[t][iy * nx + ix] = best;
                dp.best_target[t][iy * nx + ix] = best_j;
            }
        }
    }
    return dp;
}

double brute_force_value(const FiniteInstance& inst, int t, std::size_t iy, std::size_t ix) {
    const std::size_t nx = inst.n_x();
    const double y = inst.control_grid[iy];
    const double x = inst.price_states[ix];
    const auto& w = inst.action_set(t, iy, ix);
    if (w.empty()) throw std::domain_error("brute_force_value: empty action set");
    double best = -std::numeric_limits<double>::infinity();
    for (std::int32_t j = w.lo; j <= w.hi; ++j) {
        double v = inst.payoff(t, y - inst.control_grid[j], x);
        if (t < inst.horizon) {
            const auto& p = inst.transitions[t];
            for (std::size_t l = 0; l < nx; ++l) {
                const double pr = p[ix * nx + l];
                if (pr > 0.0) v += pr * brute_force_value(inst, t + 1, j, l);
            }
        }
        best = std::max(best, v);
    }
    return best;
}

PathSet simulate_chain(const FiniteInstance& inst, std::size_t ix0, std::size_t n,
                       std::uint64_t seed) {
    inst.validate();
    require(ix0 < inst.n_x(), "simulate_chain: bad initial state");
    const std::size_t nx = inst.n_x();
    PathSet out;
    out.horizon = inst.horizon;
    out.n_paths = n;
    out.seed = seed;
    out.stream_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.stream_ids[i] = i;
    out.values.assign(n * (inst.horizon + 1), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const CounterRng rng(seed, out.stream_ids[i]);
        std::size_t ix = ix0;
        out.values[i * (inst.horizon + 1)] = inst.price_states[ix];
        for (int t = 0; t < inst.horizon; ++t) {
            const double u = rng.uniform(static_cast<std::uint64_t>(t));
            const auto& p = inst.transitions[t];
            double acc = 0.0;
            std::size_t next = nx - 1;
            for (std::size_t l = 0; l < nx; ++l) {
                acc += p[ix * nx + l];
                if (u < acc) {
                    next = l;
                    break;
                }
            }
            ix = next;
            out.values[i * (inst.horizon + 1) + t + 1] = inst.price_states[ix];
        }
    }
    return out;
}

OracleValueModel::OracleValueModel(const FiniteInstance& inst, const DpResult& dp)
    : inst_(&inst), value_(dp.value) {
    const std::size_t ny = inst.n_y(), nx = inst.n_x();
    cont_.assign(inst.horizon, std::vector<double>(ny * nx, 0.0));
    for (int t = 0; t < inst.horizon; ++t) {
        const auto& p = inst.transitions[t];
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < nx; ++ix) {
                double ev = 0.0;
                for (std::size_t l = 0; l < nx; ++l)
                    ev += p[ix * nx + l] * value_[t + 1][iy * nx + l];
                cont_[t][iy * nx + ix] = ev;
            }
    }
}

double OracleValueModel::value(int t, double y, double x) const {
    const std::size_t iy = inst_->control_index(y);
    const std::size_t ix = inst_->price_index(x);
    return value_[t][iy * inst_->n_x() + ix];
}

StepEval OracleValueModel::step(int t, double x, std::uint64_t /*path_key*/) const {
    const std::size_t ix = inst_->price_index(x);
    StepEval eval;
    eval.value_fn = [this, t, ix](double y) {
        return value_[t][inst_->control_index(y) * inst_->n_x() + ix];
    };
    eval.cont_fn = [this, t, ix](double y) {
        return cont_[t][inst_->control_index(y) * inst_->n_x() + ix];
    };
    return eval;
}

double surplus_zero_check(const ControlProblem& problem, const FiniteInstance& inst,
                          const ValueModel& vm, const PathSet& paths) {
    DualConfig config;
    config.impl = DualImpl::table;
    config.grid = inst.control_grid;
    config.y0 = inst.control_grid;
    config.y_domain = {inst.control_grid.front(), inst.control_grid.back()};
    const DualEstimate est = run_dual(problem, paths, vm, config);
    double worst = 0.0;
    for (const auto& per_y0 : est.path_surplus)
        for (double f : per_y0) worst = std::max(worst, std::abs(f));
    return worst;
}

namespace {

// payoff stored as a finite table over (t, exercise amount, price index)
struct PayoffTable {
    std::vector<double> h_values;
    std::map<std::tuple<int, std::size_t, std::size_t>, double> entries;
    std::vector<double> prices;

    std::size_t h_index(double h) const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < h_values.size(); ++i)
            if (std::abs(h_values[i] - h) < std::abs(h_values[best] - h)) best = i;
        return best;
    }

    double operator()(int t, double h, double x) const {
        std::size_t ix = 0;
        const double tol = 1e-9 * (1.0 + std::abs(x));
        for (std::size_t i = 0; i < prices.size(); ++i)
            if (std::abs(prices[i] - x) <= tol) ix = i;
        const auto it = entries.find({t, h_index(h), ix});
        return it == entries.end() ? 0.0 : it->second;
    }
};

}  // namespace

FiniteInstance read_instance(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open instance file: " + file.string());
    FiniteInstance inst;
    PayoffTable table;
    std::map<int, std::vector<std::pair<int, std::vector<double>>>> rows;  // t -> (row, probs)
    std::vector<std::array<std::int64_t, 5>> action_lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "horizon") {
            ss >> inst.horizon;
        } else if (tag == "prices") {
            double v;
            while (ss >> v) inst.price_states.push_back(v);
        } else if (tag == "controls") {
            double v;
            while (ss >> v) inst.control_grid.push_back(v);
        } else if (tag == "hvalues") {
            double v;
            while (ss >> v) table.h_values.push_back(v);
        } else if (tag == "transition") {
            int t, row;
            ss >> t >> row;
            std::vector<double> probs;
            double v;
            while (ss >> v) probs.push_back(v);
            rows[t].emplace_back(row, std::move(probs));
        } else if (tag == "action") {
            std::array<std::int64_t, 5> a{};
            ss >> a[0] >> a[1] >> a[2] >> a[3] >> a[4];
            action_lines.push_back(a);
        } else if (tag == "payoff") {
            int t;
            std::size_t ih, ix;
            double v;
            ss >> t >> ih >> ix >> v;
            table.entries[{t, ih, ix}] = v;
        } else {
            throw std::runtime_error("instance file: unknown tag '" + tag + "'");
        }
    }
    const std::size_t nx = inst.n_x(), ny = inst.n_y();
    inst.transitions.assign(inst.horizon, std::vector<double>(nx * nx, 0.0));
    for (auto& [t, trows] : rows) {
        require(t >= 0 && t < inst.horizon, "instance file: transition time out of range");
        for (auto& [row, probs] : trows) {
            require(probs.size() == nx, "instance file: transition row length mismatch");
            std::copy(probs.begin(), probs.end(), inst.transitions[t].begin() + row * nx);
        }
    }
    inst.actions.assign((inst.horizon + 1) * ny * nx, FiniteInstance::Window{});
    for (const auto& a : action_lines) {
        inst.actions[(static_cast<std::size_t>(a[0]) * ny + a[1]) * nx + a[2]] = {
            static_cast<std::int32_t>(a[3]), static_cast<std::int32_t>(a[4])};
    }
    table.prices = inst.price_states;
    inst.payoff = table;
    inst.validate();
    return inst;
}

void write_instance(const FiniteInstance& inst, const std::filesystem::path& file) {
    std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write instance file: " + file.string());
    const std::size_t nx = inst.n_x(), ny = inst.n_y();
    out << "horizon " << inst.horizon << "\n";
    out << "prices";
    for (double v : inst.price_states) out << ' ' << format_double(v, 17);
    out << "\ncontrols";
    for (double v : inst.control_grid) out << ' ' << format_double(v, 17);
    out << "\n";

    // distinct exercise amounts reachable through the action windows
    std::vector<double> h_values;
    const double span = inst.control_grid.back() - inst.control_grid.front();
    const double tol = 1e-9 * (1.0 + span);
    auto h_slot = [&](double h) {
        for (std::size_t i = 0; i < h_values.size(); ++i)
            if (std::abs(h_values[i] - h) <= tol) return i;
        h_values.push_back(h);
        return h_values.size() - 1;
    };
    std::map<std::tuple<int, std::size_t, std::size_t>, double> entries;
    for (int t = 0; t <= inst.horizon; ++t)
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const auto& w = inst.action_set(t, iy, ix);
                for (std::int32_t j = w.lo; j <= w.hi; ++j) {
                    const double h = inst.control_grid[iy] - inst.control_grid[j];
                    const std::size_t ih = h_slot(h);
                    const double v = inst.payoff(t, h, inst.price_states[ix]);
                    if (v != 0.0) entries[{t, ih, ix}] = v;
                }
            }
    out << "hvalues";
    for (double v : h_values) out << ' ' << format_double(v, 17);
    out << "\n";
    for (int t = 0; t < inst.horizon; ++t)
        for (std::size_t i = 0; i < nx; ++i) {
            out << "transition " << t << ' ' << i;
            for (std::size_t j = 0; j < nx; ++j)
                out << ' ' << format_double(inst.transitions[t][i * nx + j], 17);
            out << "\n";
        }
    for (int t = 0; t <= inst.horizon; ++t)
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const auto& w = inst.action_set(t, iy, ix);
                out << "action " << t << ' ' << iy << ' ' << ix << ' ' << w.lo << ' ' << w.hi
                    << "\n";
            }
    for (const auto& [key, v] : entries) {
        const auto [t, ih, ix] = key;
        out << "payoff " << t << ' ' << ih << ' ' << ix << ' ' << format_double(v, 17) << "\n";
    }
}

ControlProblem instance_problem(const FiniteInstance& inst) {
    ControlProblem p;
    p.horizon = inst.horizon;
    p.payoff = inst.payoff;
    p.y_domain = {inst.control_grid.front(), inst.control_grid.back()};
    p.y0_domain = p.y_domain;
    p.constraint_dep = ConstraintDep::full;
    p.constraints = [inst](int t, double y, double x) {
        const std::size_t iy = inst.control_index(y);
        const std::size_t ix = inst.price_index(x);
        const auto& w = inst.action_set(t, iy, ix);
        Interval k{1.0, 0.0};  // empty
        if (!w.empty()) {
            k.lo = inst.control_grid[iy] - inst.control_grid[w.hi];
            k.hi = inst.control_grid[iy] - inst.control_grid[w.lo];
        }
        return k;
    };
    return p;
}

}  // namespace storeval
