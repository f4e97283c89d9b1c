// Deterministic parameter grids over strategy and cost axes.
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvr/amm.hpp"
#include "rvr/bench.hpp"
#include "rvr/cex.hpp"
#include "rvr/market_data.hpp"
#include "rvr/strategy.hpp"

namespace rvr {

/// Axis values. Cells are enumerated lexicographically in this field order,
/// `nu` varying fastest.
struct SweepAxes {
    std::vector<double> memory_days;
    std::vector<double> k;
    std::vector<double> fee_bps;
    std::vector<double> gas_usd;
    std::vector<double> tau_cex_bps;
    std::vector<double> nu;
};

struct SweepGrid {
    SweepAxes axes;
    StrategyParams strategy;  // memory_days and aggressiveness are overridden per cell
    std::size_t discovery_delay_steps = 1;
    std::vector<double> spreads;  // proportional, one per asset
    double initial_value = 0.0;

    std::size_t strategy_count() const noexcept { return axes.memory_days.size() * axes.k.size(); }
    std::size_t cell_count() const noexcept;
    void validate(std::size_t n_assets) const;
};

struct CellIndex {
    std::size_t memory = 0, k = 0, fee = 0, gas = 0, tau = 0, nu = 0;
};

CellIndex cell_at(const SweepGrid& grid, std::size_t flat);
std::size_t flat_index(const SweepGrid& grid, const CellIndex& cell);

/// Everything one simulation needs.
struct CellConfig {
    StrategyParams strategy;
    double gamma = 1.0;
    ArbParams arb;
    CexCostParams cex;
    double initial_value = 0.0;
};

CellConfig make_cell_config(const SweepGrid& grid, const CellIndex& cell);
/// Summary row with the coordinates of `cell` filled in and an empty summary.
SummaryRow cell_coordinates(const SweepGrid& grid, const CellIndex& cell);
std::string describe_cell(const SummaryRow& coords);

struct CellRun {
    RunSummary summary;
    WeightTrajectory trajectory{0, 0};
    AmmRun amm;
    CexRun cex;
    std::vector<double> lvr;
};

/// One full simulation: trajectory, pool, CEX and frictionless reference on
/// the same prices and weights.
CellRun run_cell(const PriceSeries& series, const CellConfig& config, bool keep_logs = false);

struct SweepRow {
    SummaryRow row;
    double max_fixed_point_residual = 0.0;
    std::size_t pool_trades = 0;
    double noise_income_usd = 0.0;
};

struct SweepOptions {
    std::size_t workers = 1;
    std::size_t flush_every = 0;           // 0: never flush during the run
    std::filesystem::path partial_path;    // empty: no partial file
    std::function<void(std::size_t done, std::size_t total)> progress;
};

/// A cell (or a shared sub-run) failed; the message carries its coordinates.
class CellError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Runs every cell. Pool runs are shared across CEX fee values and CEX runs
/// across pool settings; rows come out in flat cell order whatever the
/// worker count.
std::vector<SweepRow> run_grid(const PriceSeries& series, const SweepGrid& grid, const SweepOptions& options = {});

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace rvr
