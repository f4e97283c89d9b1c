#include "rvr/cex.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "rvr/error.hpp"
#include "rvr/format.hpp"

namespace rvr {

void CexCostParams::validate(std::size_t n_assets) const {
    if (!(tau_cex >= 0.0 && tau_cex < 1.0)) throw ConfigError("cex: tau_cex must be in [0, 1)");
    if (spreads.size() != n_assets) throw ConfigError("cex: need one spread per asset");
    for (double s : spreads) {
        if (!(s >= 0.0 && s < 1.0)) throw ConfigError("cex: spreads must be in [0, 1)");
    }
}

double commission_cost(std::span<const double> old_reserves, std::span<const double> new_reserves,
                       std::span<const double> prices, double tau) {
    double bought = 0.0;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        bought += prices[i] * std::max(new_reserves[i] - old_reserves[i], 0.0);
    }
    return tau * bought;
}

double spread_cost(std::span<const double> old_reserves, std::span<const double> new_reserves,
                   std::span<const double> prices, std::span<const double> spreads) {
    double c = 0.0;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        c += prices[i] * spreads[i] * std::abs(new_reserves[i] - old_reserves[i]);
    }
    return 0.5 * c;
}

RebalanceResult solve_rebalance(const CexState& state, std::span<const double> target_w,
                                std::span<const double> prices, const CexCostParams& costs) {
    const std::size_t n = prices.size();
    const auto& old = state.reserves;
    double mark = 0.0;
    for (std::size_t i = 0; i < n; ++i) mark += old[i] * prices[i];
    if (!(mark > 0.0)) throw SolverError("solve_rebalance: portfolio has no value to rebalance");

    std::vector<double> fresh(n);
    auto reserves_at = [&](double v) {
        for (std::size_t i = 0; i < n; ++i) fresh[i] = target_w[i] * v / prices[i];
    };
    auto cost_at = [&](double v) {
        reserves_at(v);
        return commission_cost(old, fresh, prices, costs.tau_cex) + spread_cost(old, fresh, prices, costs.spreads);
    };
    // d cost / dV, one-sided from the right at kinks
    auto cost_slope = [&](double v) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = target_w[i] * v - old[i] * prices[i];
            const bool buying = diff >= 0.0;
            if (buying) s += costs.tau_cex * target_w[i];
            s += 0.5 * costs.spreads[i] * target_w[i] * (buying ? 1.0 : -1.0);
        }
        return s;
    };
    auto excess = [&](double v) { return v - mark + cost_at(v); };

    // excess(0) < 0 <= excess(mark) because every spread is below one.
    double lo = 0.0;
    double hi = mark;
    double v = mark - cost_at(mark);
    int it = 0;
    constexpr int max_iter = 200;
    const double tol = 1e-14 * mark;
    for (; it < max_iter; ++it) {
        const double f = excess(v);
        if (std::abs(f) <= tol) break;
        if (f > 0.0) hi = std::min(hi, v); else lo = std::max(lo, v);
        double next = v - f / (1.0 + cost_slope(v));
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 1e-16 * mark) { v = next; break; }
        v = next;
    }

    RebalanceResult res;
    res.iterations = it;
    reserves_at(v);
    res.cost_fees = commission_cost(old, fresh, prices, costs.tau_cex);
    res.cost_spread = spread_cost(old, fresh, prices, costs.spreads);
    res.cost_usd = res.cost_fees + res.cost_spread;
    res.relative_residual = std::abs(v - (mark - res.cost_usd)) / v;
    if (!(v > 0.0) || !(res.relative_residual <= 1e-9)) {
        std::ostringstream msg;
        msg << "solve_rebalance: no fixed point found (V=" << v << ", mark=" << mark
            << ", residual=" << res.relative_residual << ", iterations=" << it << ")";
        throw SolverError(msg.str());
    }
    res.trade.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (fresh[i] < 0.0) throw SolverError("solve_rebalance: target would require a short position");
        res.trade[i] = fresh[i] - old[i];
        res.turnover_usd += prices[i] * std::abs(res.trade[i]);
    }
    res.state.reserves = fresh;
    res.state.value = v;
    return res;
}

CexRun run_cex(const PriceSeries& series, const WeightTrajectory& trajectory, const CexCostParams& costs,
               double initial_value, bool keep_steps) {
    const std::size_t n = series.assets();
    const std::size_t rows = series.steps();
    if (trajectory.rows() != rows || trajectory.assets() != n) {
        throw ConfigError("run_cex: trajectory shape does not match price series");
    }
    if (!(initial_value > 0.0)) throw ConfigError("run_cex: initial value must be positive");
    costs.validate(n);

    CexState state;
    state.reserves.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        state.reserves[i] = trajectory.row(0)[i] * initial_value / series.price(0, i);
    }
    state.value = initial_value;

    CexRun run;
    run.values.reserve(rows);
    run.values.push_back(initial_value);
    if (keep_steps) run.steps.push_back({initial_value, 0.0, 0.0, 0.0});
    for (std::size_t t = 1; t < rows; ++t) {
        auto res = solve_rebalance(state, trajectory.row(t), series.row(t), costs);
        run.values.push_back(res.state.value);
        run.total_fees += res.cost_fees;
        run.total_spread += res.cost_spread;
        run.max_relative_residual = std::max(run.max_relative_residual, res.relative_residual);
        if (keep_steps) run.steps.push_back({res.state.value, res.cost_fees, res.cost_spread, res.turnover_usd});
        state = std::move(res.state);
    }
    return run;
}

void write_cex_steps_csv(std::ostream& out, const std::vector<CexStepRecord>& steps) {
    out << "step,V_cex,cost_fees,cost_spread,turnover_usd\n";
    for (std::size_t t = 0; t < steps.size(); ++t) {
        const auto& s = steps[t];
        out << t << ',' << format_double(s.value) << ',' << format_double(s.cost_fees) << ','
            << format_double(s.cost_spread) << ',' << format_double(s.turnover_usd) << '\n';
    }
}

}  // namespace rvr
