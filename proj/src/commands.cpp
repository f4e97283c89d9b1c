#include "rvr/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rvr/bench.hpp"
#include "rvr/config.hpp"
#include "rvr/error.hpp"
#include "rvr/format.hpp"
#include "rvr/sweep.hpp"

namespace rvr {

namespace fs = std::filesystem;

namespace {

RunConfig resolve(const CliOptions& o) {
    auto overrides = o.overrides;
    if (o.seed) overrides.push_back("gbm.seed=" + std::to_string(*o.seed));
    return load_config(o.config, overrides);
}

fs::path output_dir(const CliOptions& o, const RunConfig& c) {
    fs::path dir = o.out ? *o.out : c.out_dir.value_or("out");
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void echo_config(const fs::path& dir, const RunConfig& c) {
    auto out = open_out(dir / "config.effective.ini");
    write_effective_config(out, c);
}

void write_series_csv(const fs::path& path, const PriceSeries& series, const CellRun& run) {
    auto out = open_out(path);
    const auto gap = rvr(run.amm.values, run.cex.values);
    out << "step,timestamp,V_pool,V_cex,V_lvr,rvr\n";
    for (std::size_t t = 0; t < series.steps(); ++t) {
        out << t << ',' << series.timestamps()[t] << ',' << format_double(run.amm.values[t]) << ','
            << format_double(run.cex.values[t]) << ',' << format_double(run.lvr[t]) << ',' << format_double(gap[t])
            << '\n';
    }
}

void write_single_run(const fs::path& dir, const PriceSeries& series, const RunConfig& c, const CellRun& run) {
    write_series_csv(dir / "series.csv", series, run);
    {
        auto out = open_out(dir / "summary.csv");
        SummaryRow row;
        row.memory_days = c.strategy.memory_days;
        row.k = c.strategy.aggressiveness;
        row.fee_bps = c.fee_bps;
        row.gas_usd = c.arb.gas_cost_usd;
        row.tau_cex_bps = c.tau_cex_bps;
        row.nu = c.arb.noise_multiplier;
        row.summary = run.summary;
        write_summary_header(out);
        write_summary_row(out, row);
    }
    {
        auto out = open_out(dir / "trades.csv");
        write_trade_log_csv(out, run.amm.log);
    }
    {
        auto out = open_out(dir / "cex_steps.csv");
        write_cex_steps_csv(out, run.cex.steps);
    }
    {
        auto out = open_out(dir / "trajectory.csv");
        write_trajectory_csv(out, run.trajectory);
    }
}

void simulate_into(const fs::path& dir, const RunConfig& c, const PriceSeries& series, std::ostream& log) {
    fs::create_directories(dir);
    echo_config(dir, c);
    const auto run = run_cell(series, base_cell(c), true);
    write_single_run(dir, series, c, run);
    const auto& s = run.summary;
    log << "simulate: " << series.steps() << " steps, " << series.assets() << " assets\n"
        << "  final RVR " << format_double(s.final_rvr_usd) << " USD (scaled " << format_double(s.scaled_rvr)
        << ")\n"
        << "  pool return " << format_double(s.pool_return) << ", cex return " << format_double(s.cex_return)
        << ", LVR " << format_double(s.lvr_usd) << " USD\n"
        << "  pool trades " << run.amm.trades << ", monthly volume " << format_double(s.monthly_volume_usd)
        << " USD\n"
        << "  outputs in " << dir.string() << '\n';
}

void grid_into(const fs::path& dir, const std::string& name, const RunConfig& c, const SweepAxes& axes,
               const PriceSeries& series, std::size_t workers, bool cell_series, std::ostream& log) {
    fs::create_directories(dir);
    echo_config(dir, c);
    const auto grid = make_grid(c, axes);
    log << name << ": " << grid.cell_count() << " cells (" << grid.strategy_count() << " strategies), " << workers
        << " worker(s)\n";
    const auto started = std::chrono::steady_clock::now();

    SweepOptions opts;
    opts.workers = workers;
    opts.flush_every = c.flush_every;
    opts.partial_path = dir / (name + ".csv.partial");
    const auto rows = run_grid(series, grid, opts);
    {
        auto out = open_out(dir / (name + ".csv"));
        write_sweep_csv(out, rows);
    }
    if (cell_series) {
        for (std::size_t i = 0; i < grid.cell_count(); ++i) {
            const auto cell_dir = dir / "cells" / std::to_string(i);
            fs::create_directories(cell_dir);
            const auto run = run_cell(series, make_cell_config(grid, cell_at(grid, i)));
            write_series_csv(cell_dir / "series.csv", series, run);
        }
    }
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log << name << ": wrote " << rows.size() << " rows to " << (dir / (name + ".csv")).string() << " in "
        << format_double(std::round(elapsed * 100.0) / 100.0) << " s\n";
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int cmd_simulate(const CliOptions& o, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto c = resolve(o);
        const auto series = load_series(c);
        simulate_into(output_dir(o, c), c, series, log);
    });
}

int cmd_sweep(const CliOptions& o, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto c = resolve(o);
        if (!c.sweep) throw ConfigError("sweep: config has no [sweep] section");
        const auto series = load_series(c);
        grid_into(output_dir(o, c), "sweep", c, *c.sweep, series, o.workers, c.write_cell_series, log);
    });
}

int cmd_cube(const CliOptions& o, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto c = resolve(o);
        if (!c.cube) throw ConfigError("cube: config has no [cube] section");
        const auto series = load_series(c);
        grid_into(output_dir(o, c), "cube", c, *c.cube, series, o.workers, false, log);
    });
}

int cmd_emit_figure_data(const CliOptions& o, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto c = resolve(o);
        const auto series = load_series(c);
        const auto dir = output_dir(o, c);
        simulate_into(dir / "timeseries", c, series, log);
        if (c.sweep) grid_into(dir / "sweep", "sweep", c, *c.sweep, series, o.workers, false, log);
        if (c.cube) grid_into(dir / "cube", "cube", c, *c.cube, series, o.workers, false, log);
    });
}

int run_cli(int argc, char** argv) {
    CLI::App app{"rvr: AMM pool versus CEX rebalancing simulator"};
    app.require_subcommand(1);

    CliOptions opts;
    std::string out;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config, "INI configuration file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out, "Output directory (default: run.out_dir or ./out)");
        cmd->add_option("--workers", opts.workers, "Worker threads for grids")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Override gbm.seed");
        cmd->add_option("--set", opts.overrides, "Override a key: section.key=value");
    };
    auto* simulate = app.add_subcommand("simulate", "Single run: pool, CEX and LVR value series");
    auto* sweep = app.add_subcommand("sweep", "Strategy/cost grid from the [sweep] section");
    auto* cube = app.add_subcommand("cube", "Cost cube from the [cube] section");
    auto* figures = app.add_subcommand("emit-figure-data", "All CSVs consumed by the figure scripts");
    for (auto* cmd : {simulate, sweep, cube, figures}) add_common(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    if (!out.empty()) opts.out = out;
    for (auto* cmd : {simulate, sweep, cube, figures}) {
        if (cmd->get_option("--seed")->count() > 0) opts.seed = seed;
    }

    if (simulate->parsed()) return cmd_simulate(opts, std::cout, std::cerr);
    if (sweep->parsed()) return cmd_sweep(opts, std::cout, std::cerr);
    if (cube->parsed()) return cmd_cube(opts, std::cout, std::cerr);
    return cmd_emit_figure_data(opts, std::cout, std::cerr);
}

}  // namespace rvr
