// Target weight trajectories shared by the pool and the CEX benchmark.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "rvr/market_data.hpp"

namespace rvr {

enum class StrategyKind { momentum, constant };

StrategyKind parse_strategy_kind(std::string_view text);
std::string_view to_string(StrategyKind kind);

struct StrategyParams {
    StrategyKind kind = StrategyKind::constant;
    std::vector<double> base_weights;
    double memory_days = 1.0;      // EWMA half-life, in days of steps
    double aggressiveness = 1.0;   // weight tilt per unit of per-step log return
    double min_weight = 0.03;
    std::size_t rebalance_interval = 1440;
    std::size_t interpolation_steps = 1440;

    /// Throws ConfigError. Base weights must also sit inside the clamp bounds.
    void validate(std::size_t n_assets) const;
};

/// T x N matrix of weight rows, row t is the target vector in force at step t.
class WeightTrajectory {
public:
    WeightTrajectory(std::size_t rows, std::size_t assets)
        : rows_(rows), assets_(assets), weights_(rows * assets, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t assets() const noexcept { return assets_; }
    std::span<const double> row(std::size_t t) const noexcept {
        return {weights_.data() + t * assets_, assets_};
    }
    std::span<double> row(std::size_t t) noexcept { return {weights_.data() + t * assets_, assets_}; }

private:
    std::size_t rows_;
    std::size_t assets_;
    std::vector<double> weights_;
};

/// Bias-corrected exponentially weighted mean of one-step log returns.
///
/// With decay b = 2^(-1/h) the estimate after increments r_1..r_t is
/// sum b^(t-s) r_s / sum b^(t-s). An infinite half-life gives the running mean.
class EwmaGradient {
public:
    EwmaGradient(std::size_t assets, double half_life_steps);

    void update(std::span<const double> log_increments);
    std::vector<double> value() const;

private:
    double decay_;
    double weight_sum_ = 0.0;
    std::vector<double> weighted_sum_;
};

/// Gradient estimate using log increments of rows 1..step (prices up to and
/// including `step`). Step 0 has no increments and yields zeros.
std::vector<double> ewma_log_gradient(const PriceSeries& series, double memory_days, std::size_t step);

/// Pre-clamp tilt: base_i + k (g_i - sum_j base_j g_j).
std::vector<double> raw_momentum_target(const StrategyParams& params, std::span<const double> gradient);
std::vector<double> momentum_target(const StrategyParams& params, std::span<const double> gradient);

/// Clip into [min_weight, 1 - (N-1) min_weight] and rescale the unclipped
/// entries until the vector sums to one.
std::vector<double> clamp_normalize(std::span<const double> raw, double min_weight);

WeightTrajectory build_trajectory(const StrategyParams& params, const PriceSeries& series);

void write_trajectory_csv(std::ostream& out, const WeightTrajectory& trajectory);

}  // namespace rvr
