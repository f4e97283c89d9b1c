// Per-asset price series: CSV I/O, validation and synthetic GBM paths.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rvr {

/// Timestamped mid prices for N assets at a fixed step.
///
/// Immutable once constructed; the constructor enforces every invariant
/// (T >= 2, N >= 2, strictly positive finite prices, strictly increasing
/// timestamps with constant spacing).
class PriceSeries {
public:
    PriceSeries(std::vector<std::int64_t> timestamps,
                std::vector<double> prices_row_major,
                std::vector<std::string> asset_labels);

    std::size_t steps() const noexcept { return timestamps_.size(); }
    std::size_t assets() const noexcept { return labels_.size(); }

    std::span<const double> row(std::size_t t) const noexcept {
        return {prices_.data() + t * labels_.size(), labels_.size()};
    }
    double price(std::size_t t, std::size_t i) const noexcept {
        return prices_[t * labels_.size() + i];
    }

    const std::vector<std::int64_t>& timestamps() const noexcept { return timestamps_; }
    const std::vector<std::string>& asset_labels() const noexcept { return labels_; }
    std::span<const double> prices() const noexcept { return prices_; }

    std::int64_t step_seconds() const noexcept { return timestamps_[1] - timestamps_[0]; }
    double steps_per_day() const noexcept { return 86400.0 / static_cast<double>(step_seconds()); }
    /// Elapsed time between first and last row, in minutes.
    double duration_minutes() const noexcept {
        return static_cast<double>(timestamps_.back() - timestamps_.front()) / 60.0;
    }

    /// A copy holding only the first `count` rows (count >= 2).
    PriceSeries truncated(std::size_t count) const;

private:
    std::vector<std::int64_t> timestamps_;
    std::vector<double> prices_;
    std::vector<std::string> labels_;
};

/// Parameters for correlated geometric Brownian motion paths.
struct GbmSpec {
    std::vector<double> initial_prices;
    std::vector<double> drifts;        // per-step log drift
    std::vector<double> volatilities;  // per-step log volatility
    std::vector<double> correlation;   // N x N, row-major
    std::size_t steps = 0;             // number of price rows, including the initial one
    std::uint64_t seed = 0;
    std::vector<std::string> asset_labels;  // defaults to A1..AN when empty
    std::int64_t start_timestamp = 0;
    std::int64_t step_seconds = 60;

    void validate() const;
};

PriceSeries parse_price_csv(std::istream& in,
                            const std::optional<std::vector<std::string>>& expected_assets = std::nullopt);
PriceSeries load_price_csv(const std::filesystem::path& path,
                           const std::optional<std::vector<std::string>>& expected_assets = std::nullopt);
void write_price_csv(std::ostream& out, const PriceSeries& series);

PriceSeries generate_gbm(const GbmSpec& spec);

}  // namespace rvr
