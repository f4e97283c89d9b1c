// N-asset geometric-mean pool with time-varying weights.
//
// The pool keeps prod R_i^{w_i} = k. Trades pay a fee on inflows: only
// gamma * delta_in counts toward the invariant, the full inflow is kept as
// reserves. Arbitrageurs trade the profit-maximising amount at market prices
// once an opportunity survives the discovery delay and clears the gas cost.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rvr/market_data.hpp"
#include "rvr/strategy.hpp"

namespace rvr {

struct PoolState {
    std::vector<double> reserves;
    std::vector<double> weights;
    double gamma = 1.0;  // trader keeps gamma of the input toward the invariant

    void validate() const;
};

struct ArbParams {
    double gas_cost_usd = 0.0;
    std::size_t discovery_delay_steps = 1;
    double noise_multiplier = 0.0;

    void validate() const;
};

struct TradeOutcome {
    bool executed = false;
    std::vector<double> delta_in;   // tokens paid into the pool
    std::vector<double> delta_out;  // tokens taken from the pool
    double arb_profit_usd = 0.0;
    double volume_usd = 0.0;        // market value of the tokens leaving the pool
};

double pool_value(const PoolState& state, std::span<const double> prices);
double invariant_k(const PoolState& state);
double log_invariant_k(const PoolState& state);

/// Reserves on the current invariant surface whose values are proportional
/// to the weights at `prices`.
std::vector<double> aligned_reserves(const PoolState& state, std::span<const double> prices);

/// Profit-maximising arbitrage against the pool at market `prices`.
///
/// `executed` is set when the trade is non-null (positive profit before gas);
/// the caller applies any gas threshold. Throws SolverError if the solved
/// reserves miss the invariant surface.
TradeOutcome optimal_arb_trade(const PoolState& state, std::span<const double> prices);

/// True when no trade is profitable before gas: every pairwise ratio of
/// quoted to market price lies in [gamma, 1/gamma].
bool no_arb_check(const PoolState& state, std::span<const double> prices);

/// Moves tokens as described by `trade`.
void apply_trade(PoolState& state, const TradeOutcome& trade);

/// Credits (1-gamma) * nu * arb_volume_usd as reserves bought at market prices
/// in proportion to the current weights. Returns the income credited.
double apply_noise_income(PoolState& state, std::span<const double> prices, double arb_volume_usd,
                          const ArbParams& arb);

/// At most one opportunity waits for execution at a time.
struct PendingArb {
    std::optional<std::size_t> execute_at;
};

struct StepRecord {
    bool evaluated = false;   // an opportunity was due this step
    TradeOutcome trade;       // executed == false for a lapsed opportunity
    double k_before = 0.0;    // invariant at the new weights, before the trade
    double k_after = 0.0;     // after the trade, before noise income
    double noise_income_usd = 0.0;
};

/// Advance one step: adopt `weights_row`, execute a due opportunity if it still
/// clears gas, otherwise look for a new one to queue.
StepRecord step_pool(PoolState& state, std::span<const double> weights_row, std::span<const double> prices,
                     const ArbParams& arb, PendingArb& pending, std::size_t step);

struct TradeLogEntry {
    std::size_t step = 0;
    bool executed = false;
    double profit_usd = 0.0;
    double volume_usd = 0.0;
    double k_before = 0.0;
    double k_after = 0.0;
    double pool_value = 0.0;
};

struct AmmRun {
    std::vector<double> values;  // V_pool(t) after each step
    std::vector<TradeLogEntry> log;
    std::size_t trades = 0;
    double volume_usd = 0.0;
    double noise_income_usd = 0.0;
    PoolState final_state;
};

/// Pool seeded at row-0 weights and prices with `initial_value`.
AmmRun run_amm(const PriceSeries& series, const WeightTrajectory& trajectory, double gamma,
               const ArbParams& arb, double initial_value, bool keep_log = false);

void write_trade_log_csv(std::ostream& out, const std::vector<TradeLogEntry>& log);

}  // namespace rvr
