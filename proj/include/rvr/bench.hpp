// Benchmark metrics: frictionless rebalancing reference, RVR and run summaries.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "rvr/market_data.hpp"
#include "rvr/strategy.hpp"

namespace rvr {

/// Frictionless self-financing portfolio that holds the trajectory's weights:
/// V(t) = V(t-1) + sum_i h_i(t-1) (p_i(t) - p_i(t-1)), h_i(t-1) = w_i(t-1) V(t-1) / p_i(t-1).
std::vector<double> lvr_reference(const PriceSeries& series, const WeightTrajectory& trajectory,
                                  double initial_value);

/// V_pool(t) - V_cex(t). Positive means the pool is ahead.
std::vector<double> rvr(std::span<const double> pool_values, std::span<const double> cex_values);

struct RunSummary {
    double final_rvr_usd = 0.0;
    double scaled_rvr = 0.0;
    double pool_return = 0.0;   // simple cumulative return V(T)/V(0) - 1
    double cex_return = 0.0;
    double lvr_usd = 0.0;       // V_lvr(T) - V_pool(T)
    double pool_volume_usd = 0.0;
    double monthly_volume_usd = 0.0;
};

struct SummaryInputs {
    double initial_value = 0.0;
    double final_pool = 0.0;
    double final_cex = 0.0;
    double final_lvr = 0.0;
    double pool_volume_usd = 0.0;
    double duration_minutes = 0.0;
};

RunSummary summarize(const SummaryInputs& in);

/// One row of the summary CSV: cell coordinates plus the summary.
struct SummaryRow {
    std::size_t strategy_id = 0;
    double memory_days = 0.0;
    double k = 0.0;
    double fee_bps = 0.0;      // pool fee, (1 - gamma) * 1e4
    double gas_usd = 0.0;
    double tau_cex_bps = 0.0;
    double nu = 0.0;
    RunSummary summary;
};

void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const SummaryRow& row);

}  // namespace rvr
