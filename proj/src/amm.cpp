#include "rvr/amm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "rvr/error.hpp"
#include "rvr/format.hpp"

namespace rvr {

void PoolState::validate() const {
    if (reserves.size() != weights.size() || reserves.size() < 2) {
        throw ConfigError("pool: reserves and weights must have the same size N >= 2");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("pool: gamma must be in (0, 1]");
    for (std::size_t i = 0; i < reserves.size(); ++i) {
        if (!(reserves[i] > 0.0) || !std::isfinite(reserves[i])) {
            throw ConfigError("pool: reserves must be positive and finite");
        }
        if (!(weights[i] > 0.0 && weights[i] < 1.0)) throw ConfigError("pool: weights must be in (0,1)");
    }
}

void ArbParams::validate() const {
    if (!(gas_cost_usd >= 0.0) || !std::isfinite(gas_cost_usd)) {
        throw ConfigError("arb: gas_cost_usd must be finite and >= 0");
    }
    if (!(noise_multiplier >= 0.0) || !std::isfinite(noise_multiplier)) {
        throw ConfigError("arb: noise_multiplier must be finite and >= 0");
    }
}

double pool_value(const PoolState& state, std::span<const double> prices) {
    double v = 0.0;
    for (std::size_t i = 0; i < state.reserves.size(); ++i) v += state.reserves[i] * prices[i];
    return v;
}

double log_invariant_k(const PoolState& state) {
    double lk = 0.0;
    for (std::size_t i = 0; i < state.reserves.size(); ++i) lk += state.weights[i] * std::log(state.reserves[i]);
    return lk;
}

double invariant_k(const PoolState& state) { return std::exp(log_invariant_k(state)); }

std::vector<double> aligned_reserves(const PoolState& state, std::span<const double> prices) {
    const std::size_t n = state.reserves.size();
    // log mu = log k - sum_j w_j log(w_j / p_j); R'_i = mu * w_i / p_i
    double log_mu = log_invariant_k(state);
    for (std::size_t j = 0; j < n; ++j) log_mu -= state.weights[j] * std::log(state.weights[j] / prices[j]);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(log_mu) * state.weights[i] / prices[i];
    return out;
}

bool no_arb_check(const PoolState& state, std::span<const double> prices) {
    // b_i = R_i p_i / w_i; quoted/market ratio for (i,j) is b_j / b_i.
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < state.reserves.size(); ++i) {
        const double b = state.reserves[i] * prices[i] / state.weights[i];
        lo = std::min(lo, b);
        hi = std::max(hi, b);
    }
    return state.gamma * hi <= lo;
}

namespace {

// Log change of reserve i at log-multiplier x: the asset is sold by the pool
// below its lower breakpoint, bought above its upper one, untouched between.
inline double log_change(double x, double lower, double upper) {
    return std::min(x - lower, 0.0) + std::max(x - upper, 0.0);
}

}  // namespace

TradeOutcome optimal_arb_trade(const PoolState& state, std::span<const double> prices) {
    const std::size_t n = state.reserves.size();
    TradeOutcome out;
    out.delta_in.assign(n, 0.0);
    out.delta_out.assign(n, 0.0);
    if (no_arb_check(state, prices)) return out;

    // Post-trade reserves are R'_i = clamp(R_i, gamma mu w_i/p_i, mu w_i/p_i)
    // for the scalar mu that puts them back on the invariant surface. In
    // x = log mu the invariant residual is piecewise linear and nondecreasing.
    const double log_gamma = std::log(state.gamma);
    std::vector<double> lower(n), upper(n), knots;
    knots.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        lower[i] = std::log(state.reserves[i]) + std::log(prices[i]) - std::log(state.weights[i]);
        upper[i] = lower[i] - log_gamma;
        knots.push_back(lower[i]);
        knots.push_back(upper[i]);
    }
    std::sort(knots.begin(), knots.end());

    auto residual = [&](double x) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) f += state.weights[i] * log_change(x, lower[i], upper[i]);
        return f;
    };

    // residual(knots.front()) <= 0 <= residual(knots.back())
    double x = knots.back();
    double f_left = residual(knots.front());
    for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
        const double a = knots[j];
        const double b = knots[j + 1];
        const double f_right = residual(b);
        if (f_right >= 0.0) {
            x = (f_right > f_left && b > a) ? a - f_left * (b - a) / (f_right - f_left) : b;
            x = std::clamp(x, a, b);
            break;
        }
        f_left = f_right;
    }

    const double check = residual(x);
    const double scale = 1.0 + std::abs(x);
    if (!(std::abs(check) <= 1e-10 * scale)) {
        std::ostringstream msg;
        msg << "optimal_arb_trade: invariant residual " << check << " at log multiplier " << x
            << " (gamma=" << state.gamma << ", N=" << n << ")";
        throw SolverError(msg.str());
    }

    double gained = 0.0;
    double paid = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = log_change(x, lower[i], upper[i]);
        if (d < 0.0) {
            out.delta_out[i] = -state.reserves[i] * std::expm1(d);
            gained += prices[i] * out.delta_out[i];
        } else if (d > 0.0) {
            out.delta_in[i] = state.reserves[i] * std::expm1(d) / state.gamma;
            paid += prices[i] * out.delta_in[i];
        }
    }
    const double profit = gained - paid;
    if (!(profit > 0.0)) {
        std::fill(out.delta_in.begin(), out.delta_in.end(), 0.0);
        std::fill(out.delta_out.begin(), out.delta_out.end(), 0.0);
        return out;
    }
    out.executed = true;
    out.arb_profit_usd = profit;
    out.volume_usd = gained;
    return out;
}

void apply_trade(PoolState& state, const TradeOutcome& trade) {
    for (std::size_t i = 0; i < state.reserves.size(); ++i) {
        state.reserves[i] += trade.delta_in[i] - trade.delta_out[i];
    }
}

double apply_noise_income(PoolState& state, std::span<const double> prices, double arb_volume_usd,
                          const ArbParams& arb) {
    const double income = (1.0 - state.gamma) * arb.noise_multiplier * arb_volume_usd;
    if (!(income > 0.0)) return 0.0;
    for (std::size_t i = 0; i < state.reserves.size(); ++i) {
        state.reserves[i] += state.weights[i] * income / prices[i];
    }
    return income;
}

StepRecord step_pool(PoolState& state, std::span<const double> weights_row, std::span<const double> prices,
                     const ArbParams& arb, PendingArb& pending, std::size_t step) {
    std::copy(weights_row.begin(), weights_row.end(), state.weights.begin());
    StepRecord rec;

    bool due = pending.execute_at.has_value() && *pending.execute_at <= step;
    if (!pending.execute_at && !no_arb_check(state, prices)) {
        const auto probe = optimal_arb_trade(state, prices);
        if (probe.arb_profit_usd > arb.gas_cost_usd) {
            pending.execute_at = step + arb.discovery_delay_steps;
            due = arb.discovery_delay_steps == 0;
        }
    }
    if (!due) return rec;

    pending.execute_at.reset();
    rec.evaluated = true;
    rec.k_before = invariant_k(state);
    rec.trade = optimal_arb_trade(state, prices);
    if (rec.trade.arb_profit_usd > arb.gas_cost_usd) {
        rec.trade.executed = true;
        apply_trade(state, rec.trade);
    } else {
        rec.trade.executed = false;
    }
    rec.k_after = invariant_k(state);
    if (rec.trade.executed) {
        rec.noise_income_usd = apply_noise_income(state, prices, rec.trade.volume_usd, arb);
    }
    return rec;
}

AmmRun run_amm(const PriceSeries& series, const WeightTrajectory& trajectory, double gamma,
               const ArbParams& arb, double initial_value, bool keep_log) {
    const std::size_t n = series.assets();
    const std::size_t rows = series.steps();
    if (trajectory.rows() != rows || trajectory.assets() != n) {
        throw ConfigError("run_amm: trajectory shape does not match price series");
    }
    if (!(initial_value > 0.0)) throw ConfigError("run_amm: initial value must be positive");
    arb.validate();

    PoolState state;
    state.gamma = gamma;
    state.weights.assign(trajectory.row(0).begin(), trajectory.row(0).end());
    state.reserves.resize(n);
    for (std::size_t i = 0; i < n; ++i) state.reserves[i] = state.weights[i] * initial_value / series.price(0, i);
    state.validate();

    AmmRun run;
    run.values.reserve(rows);
    PendingArb pending;
    for (std::size_t t = 0; t < rows; ++t) {
        const auto prices = series.row(t);
        const auto rec = step_pool(state, trajectory.row(t), prices, arb, pending, t);
        const double value = pool_value(state, prices);
        run.values.push_back(value);
        if (rec.evaluated) {
            if (rec.trade.executed) {
                ++run.trades;
                run.volume_usd += rec.trade.volume_usd;
                run.noise_income_usd += rec.noise_income_usd;
            }
            if (keep_log) {
                run.log.push_back({t, rec.trade.executed, rec.trade.arb_profit_usd, rec.trade.volume_usd,
                                   rec.k_before, rec.k_after, value});
            }
        }
    }
    run.final_state = std::move(state);
    return run;
}

void write_trade_log_csv(std::ostream& out, const std::vector<TradeLogEntry>& log) {
    out << "step,executed,profit_usd,volume_usd,k_before,k_after,V_pool\n";
    for (const auto& e : log) {
        out << e.step << ',' << (e.executed ? 1 : 0) << ',' << format_double(e.profit_usd) << ','
            << format_double(e.volume_usd) << ',' << format_double(e.k_before) << ','
            << format_double(e.k_after) << ',' << format_double(e.pool_value) << '\n';
    }
}

}  // namespace rvr
