// Centralised-exchange rebalancing portfolio with commission and spread costs.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "rvr/market_data.hpp"
#include "rvr/strategy.hpp"

namespace rvr {

struct CexCostParams {
    double tau_cex = 0.0;         // commission on the purchased leg
    std::vector<double> spreads;  // proportional bid-ask spread per asset

    void validate(std::size_t n_assets) const;
};

struct CexState {
    std::vector<double> reserves;
    double value = 0.0;  // mark-to-market at the prices of the last rebalance
};

/// tau * sum p_i max(new_i - old_i, 0)
double commission_cost(std::span<const double> old_reserves, std::span<const double> new_reserves,
                       std::span<const double> prices, double tau);

/// 1/2 * sum p_i s_i |new_i - old_i|
double spread_cost(std::span<const double> old_reserves, std::span<const double> new_reserves,
                   std::span<const double> prices, std::span<const double> spreads);

struct RebalanceResult {
    CexState state;
    std::vector<double> trade;  // new reserves minus old
    double cost_usd = 0.0;
    double cost_fees = 0.0;
    double cost_spread = 0.0;
    double turnover_usd = 0.0;         // sum p_i |trade_i|
    double relative_residual = 0.0;    // |V - (M - c(V))| / V
    int iterations = 0;
};

/// Rebalance to `target_w` at `prices`, paying costs out of the portfolio.
///
/// The post-trade value V solves V = M - c(w V / p) with M the mark-to-market
/// of the old reserves. The map is strictly increasing in V, so a safeguarded
/// Newton iteration with a bisection fallback on (0, M] converges. Throws
/// SolverError if the residual bound 1e-9 V is not met.
RebalanceResult solve_rebalance(const CexState& state, std::span<const double> target_w,
                                std::span<const double> prices, const CexCostParams& costs);

struct CexStepRecord {
    double value = 0.0;
    double cost_fees = 0.0;
    double cost_spread = 0.0;
    double turnover_usd = 0.0;
};

struct CexRun {
    std::vector<double> values;
    std::vector<CexStepRecord> steps;  // filled when requested
    double total_fees = 0.0;
    double total_spread = 0.0;
    double max_relative_residual = 0.0;
};

CexRun run_cex(const PriceSeries& series, const WeightTrajectory& trajectory, const CexCostParams& costs,
               double initial_value, bool keep_steps = false);

void write_cex_steps_csv(std::ostream& out, const std::vector<CexStepRecord>& steps);

}  // namespace rvr
