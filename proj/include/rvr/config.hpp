// INI run configuration: parsing, validation, defaults and the echoed copy.
//
// Sections: [data] [gbm] [run] [strategy] [amm] [cex] [sweep] [cube].
// Axis values accept comma lists or linspace(a,b,n) / geomspace(a,b,n).
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rvr/amm.hpp"
#include "rvr/market_data.hpp"
#include "rvr/strategy.hpp"
#include "rvr/sweep.hpp"

namespace rvr {

enum class DataSource { csv, gbm };

struct RunConfig {
    DataSource source = DataSource::gbm;
    std::filesystem::path csv_path;
    std::vector<std::string> assets;
    GbmSpec gbm;

    double initial_value_usd = 10'000'000.0;
    std::optional<std::filesystem::path> out_dir;  // not echoed

    StrategyParams strategy;
    double fee_bps = 0.0;
    ArbParams arb;
    double tau_cex_bps = 0.0;
    std::vector<double> spreads_bps;

    std::optional<SweepAxes> sweep;
    std::optional<SweepAxes> cube;
    std::size_t flush_every = 100;
    bool write_cell_series = false;
};

/// Expands "1,2,3", "linspace(0,100,21)" or "geomspace(1,1000,4)".
std::vector<double> parse_axis(const std::string& text);

/// `overrides` are "section.key=value" strings applied before validation.
/// Relative paths resolve against `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Fully resolved configuration; parsing it reproduces the same RunConfig.
void write_effective_config(std::ostream& out, const RunConfig& config);

PriceSeries load_series(const RunConfig& config);

/// The single simulation described by [strategy], [amm] and [cex].
CellConfig base_cell(const RunConfig& config);

SweepGrid make_grid(const RunConfig& config, const SweepAxes& axes);

}  // namespace rvr
