#include "rvr/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "rvr/error.hpp"
#include "rvr/format.hpp"

namespace rvr {

StrategyKind parse_strategy_kind(std::string_view text) {
    if (text == "momentum") return StrategyKind::momentum;
    if (text == "constant") return StrategyKind::constant;
    throw ConfigError("unknown strategy kind '" + std::string(text) + "' (expected momentum|constant)");
}

std::string_view to_string(StrategyKind kind) {
    return kind == StrategyKind::momentum ? "momentum" : "constant";
}

void StrategyParams::validate(std::size_t n_assets) const {
    const std::size_t n = base_weights.size();
    if (n != n_assets) {
        throw ConfigError("strategy: base_weights has " + std::to_string(n) + " entries for " +
                          std::to_string(n_assets) + " assets");
    }
    if (!(min_weight > 0.0) || !(min_weight * static_cast<double>(n) < 1.0)) {
        throw ConfigError("strategy: min_weight must be in (0, 1/N)");
    }
    const double upper = 1.0 - static_cast<double>(n - 1) * min_weight;
    double sum = 0.0;
    for (double w : base_weights) {
        if (!(w > 0.0 && w < 1.0)) throw ConfigError("strategy: base weights must lie in (0,1)");
        if (w < min_weight || w > upper) {
            throw ConfigError("strategy: base weight " + format_double(w) + " outside clamp bounds [" +
                              format_double(min_weight) + ", " + format_double(upper) + "]");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("strategy: base weights must sum to 1");
    if (rebalance_interval < 1 || interpolation_steps < 1) {
        throw ConfigError("strategy: rebalance_interval and interpolation_steps must be >= 1");
    }
    if (kind == StrategyKind::momentum) {
        if (!(memory_days > 0.0)) throw ConfigError("strategy: memory_days must be positive");
        if (!(aggressiveness > 0.0) || !std::isfinite(aggressiveness)) {
            throw ConfigError("strategy: aggressiveness k must be positive and finite");
        }
    }
}

EwmaGradient::EwmaGradient(std::size_t assets, double half_life_steps)
    : decay_(std::exp2(-1.0 / half_life_steps)), weighted_sum_(assets, 0.0) {}

void EwmaGradient::update(std::span<const double> log_increments) {
    weight_sum_ = decay_ * weight_sum_ + 1.0;
    for (std::size_t i = 0; i < weighted_sum_.size(); ++i) {
        weighted_sum_[i] = decay_ * weighted_sum_[i] + log_increments[i];
    }
}

std::vector<double> EwmaGradient::value() const {
    std::vector<double> g(weighted_sum_.size(), 0.0);
    if (weight_sum_ > 0.0) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = weighted_sum_[i] / weight_sum_;
    }
    return g;
}

namespace {

void log_increments(const PriceSeries& series, std::size_t t, std::vector<double>& out) {
    for (std::size_t i = 0; i < series.assets(); ++i) {
        out[i] = std::log(series.price(t, i)) - std::log(series.price(t - 1, i));
    }
}

}  // namespace

std::vector<double> ewma_log_gradient(const PriceSeries& series, double memory_days, std::size_t step) {
    const std::size_t n = series.assets();
    EwmaGradient est(n, memory_days * series.steps_per_day());
    std::vector<double> inc(n);
    const std::size_t last = std::min(step, series.steps() - 1);
    for (std::size_t t = 1; t <= last; ++t) {
        log_increments(series, t, inc);
        est.update(inc);
    }
    return est.value();
}

std::vector<double> raw_momentum_target(const StrategyParams& params, std::span<const double> gradient) {
    if (params.kind != StrategyKind::momentum) {
        throw ConfigError("momentum_target called with a non-momentum strategy");
    }
    const auto& base = params.base_weights;
    double mean = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) mean += base[i] * gradient[i];
    std::vector<double> raw(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        raw[i] = base[i] + params.aggressiveness * (gradient[i] - mean);
    }
    return raw;
}

std::vector<double> momentum_target(const StrategyParams& params, std::span<const double> gradient) {
    return clamp_normalize(raw_momentum_target(params, gradient), params.min_weight);
}

std::vector<double> clamp_normalize(std::span<const double> raw, double min_weight) {
    const std::size_t n = raw.size();
    const double lo = min_weight;
    const double hi = 1.0 - static_cast<double>(n - 1) * min_weight;
    std::vector<double> w(raw.begin(), raw.end());
    for (auto& x : w) x = std::clamp(x, lo, hi);

    constexpr double tol = 1e-12;
    for (std::size_t pass = 0; pass <= n; ++pass) {
        const double sum = std::accumulate(w.begin(), w.end(), 0.0);
        if (std::abs(sum - 1.0) <= tol) break;
        // Rescale the entries that can still move in the needed direction.
        const bool shrink = sum > 1.0;
        double fixed = 0.0;
        double free = 0.0;
        for (double x : w) {
            const bool pinned = shrink ? (x <= lo) : (x >= hi);
            (pinned ? fixed : free) += x;
        }
        const double factor = (1.0 - fixed) / free;
        for (auto& x : w) {
            const bool pinned = shrink ? (x <= lo) : (x >= hi);
            if (!pinned) x = std::clamp(x * factor, lo, hi);
        }
    }
    return w;
}

WeightTrajectory build_trajectory(const StrategyParams& params, const PriceSeries& series) {
    const std::size_t n = series.assets();
    const std::size_t rows = series.steps();
    params.validate(n);
    if (params.kind == StrategyKind::momentum && rows < params.rebalance_interval) {
        throw ConfigError("strategy: series shorter than rebalance_interval");
    }

    WeightTrajectory traj(rows, n);
    const auto& base = params.base_weights;
    if (params.kind == StrategyKind::constant) {
        for (std::size_t t = 0; t < rows; ++t) std::copy(base.begin(), base.end(), traj.row(t).begin());
        return traj;
    }

    EwmaGradient est(n, params.memory_days * series.steps_per_day());
    std::vector<double> inc(n);
    std::vector<double> start = base;
    std::vector<double> target = base;
    std::size_t progress = params.interpolation_steps;
    const double steps = static_cast<double>(params.interpolation_steps);

    std::copy(base.begin(), base.end(), traj.row(0).begin());
    for (std::size_t t = 1; t < rows; ++t) {
        // Row t may only see prices at rows < t.
        if (t >= 2) {
            log_increments(series, t - 1, inc);
            est.update(inc);
        }
        if (t % params.rebalance_interval == 0) {
            target = momentum_target(params, est.value());
            const auto prev = traj.row(t - 1);
            start.assign(prev.begin(), prev.end());
            progress = 0;
        }
        auto out = traj.row(t);
        if (progress + 1 < params.interpolation_steps) {
            ++progress;
            const double f = static_cast<double>(progress) / steps;
            for (std::size_t i = 0; i < n; ++i) out[i] = start[i] + f * (target[i] - start[i]);
        } else {
            progress = params.interpolation_steps;
            std::copy(target.begin(), target.end(), out.begin());
        }
    }
    return traj;
}

void write_trajectory_csv(std::ostream& out, const WeightTrajectory& trajectory) {
    out << "step";
    for (std::size_t i = 0; i < trajectory.assets(); ++i) out << ",w_" << (i + 1);
    out << '\n';
    for (std::size_t t = 0; t < trajectory.rows(); ++t) {
        out << t;
        for (double w : trajectory.row(t)) out << ',' << format_double(w);
        out << '\n';
    }
}

}  // namespace rvr
