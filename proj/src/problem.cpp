#include "storeval/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace storeval {

void GasStorageSpec::validate() const {
    require(y_base > 0.0, "gas: y_base must be > 0");
    require(y_max > 0.0, "gas: y_max must be > 0");
    require(c_max_at_full > 0.0, "gas: c_max_at_full must be > 0");
    require(c_min_at_empty < 0.0, "gas: c_min_at_empty must be < 0");
    require(loss_rate >= 0.0, "gas: loss_rate must be >= 0");
    require(volume_scale > 0.0, "gas: volume_scale must be > 0");
    require(dt > 0.0, "gas: dt must be > 0");
    require(horizon >= 1, "gas: horizon must be >= 1");
}

GasStorageSpec GasStorageSpec::normalized() const {
    GasStorageSpec n = *this;
    n.y_max /= volume_scale;
    n.y_base /= volume_scale;
    n.c_max_at_full /= volume_scale;
    n.c_min_at_empty /= volume_scale;
    n.loss_rate /= volume_scale;
    n.volume_scale = 1.0;
    return n;
}

GasRates gas_rates(const GasStorageSpec& spec, double y) {
    if (!(y >= 0.0 && y <= spec.y_max))
        throw std::domain_error("gas_rates: inventory outside [0, y_max]");
    const double c0 = spec.c_max_at_full / std::sqrt(spec.y_max);
    const double c2 = -1.0 / (spec.y_max + spec.y_base);
    const double c1 = -spec.c_min_at_empty / std::sqrt(1.0 / spec.y_base + c2);
    GasRates r;
    r.c_max = c0 * std::sqrt(y);
    // the radicand hits exactly 0 at y = y_max; clip fp noise below it
    const double radicand = 1.0 / (y + spec.y_base) + c2;
    r.c_min = -c1 * std::sqrt(radicand > 0.0 ? radicand : 0.0);
    return r;
}

Interval gas_constraints(const GasStorageSpec& spec, int /*t*/, double y, double x) {
    (void)x;  // the storage constraint set reads inventory only
    const GasRates r = gas_rates(spec, y);
    Interval k;
    k.hi = std::min(r.c_max * spec.dt, y);
    k.lo = -std::min(-r.c_min * spec.dt, spec.y_max - y);
    return k;
}

double gas_payoff(const GasStorageSpec& spec, int t, double h, double x) {
    if (t >= spec.horizon) return 0.0;
    const double disc = std::exp(-(spec.r_annual / 365.0) * static_cast<double>(t) * spec.dt);
    if (h >= 0.0) return disc * h * x;
    return disc * (h - spec.loss_rate * spec.dt) * x;
}

ControlProblem make_gas_problem(const GasStorageSpec& spec) {
    spec.validate();
    const GasStorageSpec n = spec.normalized();
    ControlProblem p;
    p.horizon = n.horizon;
    p.payoff = [n](int t, double h, double x) { return gas_payoff(n, t, h, x); };
    p.constraints = [n](int t, double y, double x) { return gas_constraints(n, t, y, x); };
    p.y_domain = {0.0, n.y_max};
    p.y0_domain = {0.0, n.y_max};
    p.constraint_dep = ConstraintDep::y_only;
    p.payoff_slopes = [n](int t, double x) {
        PayoffSlopes s;
        if (t >= n.horizon) return s;
        const double disc = std::exp(-(n.r_annual / 365.0) * static_cast<double>(t) * n.dt);
        s.pos_slope = disc * x;
        s.neg_slope = disc * x;
        s.drop = disc * n.loss_rate * n.dt * x;
        return s;
    };
    return p;
}

ControlProblem swing_instance(double strike, double m_daily, double M_daily, double cum_min,
                              double cum_max, int horizon) {
    require(horizon >= 1, "swing: horizon must be >= 1");
    require(m_daily >= 0.0 && m_daily <= M_daily, "swing: need 0 <= m_daily <= M_daily");
    require(cum_min >= 0.0 && cum_min <= cum_max, "swing: need 0 <= cum_min <= cum_max");
    const double days = static_cast<double>(horizon + 1);  // decisions at t = 0..horizon
    if (m_daily * days > cum_max || M_daily * days < cum_min)
        throw std::invalid_argument("swing: cumulative bounds unreachable with daily limits");

    const double slack = cum_max - cum_min;
    ControlProblem p;
    p.horizon = horizon;
    p.payoff = [strike](int /*t*/, double h, double x) { return h * std::max(x - strike, 0.0); };
    p.constraints = [=](int t, double y, double /*x*/) {
        const double remaining = static_cast<double>(horizon - t);  // decision days after t
        Interval k;
        k.lo = std::max(m_daily, y - slack - M_daily * remaining);
        k.hi = std::min(M_daily, y - m_daily * remaining);
        return k;
    };
    p.y_domain = {0.0, cum_max};
    p.y0_domain = {cum_max, cum_max};
    p.constraint_dep = ConstraintDep::time_and_y;
    p.payoff_slopes = [strike](int /*t*/, double x) {
        PayoffSlopes s;
        s.pos_slope = s.neg_slope = std::max(x - strike, 0.0);
        return s;
    };
    return p;
}

CandidateRule CandidateRule::refined(int n_h) {
    require(n_h >= 2, "CandidateRule: refined grid needs n_h >= 2");
    CandidateRule r;
    r.kind = Kind::refined_grid;
    r.n_h = n_h;
    return r;
}

CandidateRule CandidateRule::snapped(std::shared_ptr<const std::vector<double>> grid) {
    require(grid && !grid->empty(), "CandidateRule: snap grid must be nonempty");
    CandidateRule r;
    r.kind = Kind::snap_to_grid;
    r.grid = std::move(grid);
    return r;
}

void CandidateRule::collect(double y, const Interval& k, std::vector<double>& out) const {
    out.clear();
    if (k.empty()) return;
    switch (kind) {
        case Kind::bang_bang:
            out.push_back(k.lo);
            if (k.lo < 0.0 && k.hi > 0.0) out.push_back(0.0);
            if (k.hi > k.lo) out.push_back(k.hi);
            break;
        case Kind::refined_grid: {
            if (k.hi == k.lo) {
                out.push_back(k.lo);
                break;
            }
            const double step = k.width() / static_cast<double>(n_h - 1);
            for (int i = 0; i < n_h; ++i) out.push_back(k.lo + step * i);
            out[n_h - 1] = k.hi;
            break;
        }
        case Kind::snap_to_grid: {
            for (double g : *grid) {
                const double h = y - g;
                if (h >= k.lo - 1e-12 && h <= k.hi + 1e-12) out.push_back(k.clamp(h));
            }
            break;
        }
    }
}

bool feasibility_closed(const ControlProblem& problem, int t, double y, double x) {
    const Interval k = problem.constraints(t, y, x);
    if (k.empty()) return false;
    return problem.y_domain.contains(y - k.lo) && problem.y_domain.contains(y - k.hi);
}

GridWindow admissible_window(double y, const Interval& k, std::span<const double> grid) {
    GridWindow w;
    w.lo = static_cast<int>(grid.size());
    w.hi = -1;
    for (int j = 0; j < static_cast<int>(grid.size()); ++j) {
        const double h = y - grid[j];
        if (h >= k.lo - 1e-12 && h <= k.hi + 1e-12) {
            if (j < w.lo) w.lo = j;
            w.hi = j;
        }
    }
    return w;
}

}  // namespace storeval
