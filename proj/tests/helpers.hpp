// Shared fixtures for the test binaries.
#pragma once

#include <cstdint>
#include <vector>

#include "rvr/market_data.hpp"
#include "rvr/strategy.hpp"

namespace rvr::testing {

/// BTC/ETH/DAI-like minute GBM.
inline GbmSpec three_asset_gbm(std::size_t steps, std::uint64_t seed) {
    GbmSpec g;
    g.initial_prices = {30000.0, 2000.0, 1.0};
    g.drifts = {0.0, 0.0, 0.0};
    g.volatilities = {0.001, 0.0012, 0.00002};
    g.correlation = {1.0, 0.8, 0.0, 0.8, 1.0, 0.0, 0.0, 0.0, 1.0};
    g.steps = steps;
    g.seed = seed;
    g.asset_labels = {"BTC", "ETH", "DAI"};
    return g;
}

inline StrategyParams constant_strategy(std::vector<double> base) {
    StrategyParams s;
    s.kind = StrategyKind::constant;
    s.base_weights = std::move(base);
    return s;
}

inline StrategyParams momentum_strategy(std::vector<double> base, double memory_days, double k,
                                        std::size_t interval = 60) {
    StrategyParams s;
    s.kind = StrategyKind::momentum;
    s.base_weights = std::move(base);
    s.memory_days = memory_days;
    s.aggressiveness = k;
    s.rebalance_interval = interval;
    s.interpolation_steps = interval;
    return s;
}

inline PriceSeries constant_series(std::vector<double> prices, std::size_t steps) {
    std::vector<std::int64_t> ts(steps);
    std::vector<double> px;
    std::vector<std::string> labels;
    for (std::size_t t = 0; t < steps; ++t) {
        ts[t] = static_cast<std::int64_t>(t) * 60;
        px.insert(px.end(), prices.begin(), prices.end());
    }
    for (std::size_t i = 0; i < prices.size(); ++i) labels.push_back("A" + std::to_string(i + 1));
    return PriceSeries(std::move(ts), std::move(px), std::move(labels));
}

/// Series from explicit rows at one-minute spacing.
inline PriceSeries series_from_rows(const std::vector<std::vector<double>>& rows) {
    std::vector<std::int64_t> ts;
    std::vector<double> px;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        ts.push_back(static_cast<std::int64_t>(t) * 60);
        px.insert(px.end(), rows[t].begin(), rows[t].end());
    }
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < rows.front().size(); ++i) labels.push_back("A" + std::to_string(i + 1));
    return PriceSeries(std::move(ts), std::move(px), std::move(labels));
}

}  // namespace rvr::testing
