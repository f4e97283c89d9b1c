#include "rvr/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <ostream>
#include <thread>

#include "rvr/error.hpp"
#include "rvr/format.hpp"

namespace rvr {

namespace {

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
    std::vector<std::exception_ptr> errors(count);
    auto guarded = [&](std::size_t i) {
        try {
            body(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) guarded(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) guarded(i);
            });
        }
    }
    // Report the lowest failing index so the error does not depend on scheduling.
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

double gamma_from_bps(double fee_bps) { return 1.0 - fee_bps / 1e4; }

std::string what_of(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& ex) {
        return ex.what();
    } catch (...) {
        return "unknown error";
    }
}

void write_rows(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    write_sweep_csv(out, rows);
}

}  // namespace

std::size_t SweepGrid::cell_count() const noexcept {
    return axes.memory_days.size() * axes.k.size() * axes.fee_bps.size() * axes.gas_usd.size() *
           axes.tau_cex_bps.size() * axes.nu.size();
}

void SweepGrid::validate(std::size_t n_assets) const {
    const std::pair<const char*, const std::vector<double>*> named[] = {
        {"memory_days", &axes.memory_days}, {"k", &axes.k},   {"fee_bps", &axes.fee_bps},
        {"gas_usd", &axes.gas_usd},         {"tau_cex_bps", &axes.tau_cex_bps}, {"nu", &axes.nu}};
    for (const auto& [name, values] : named) {
        if (values->empty()) throw ConfigError(std::string("sweep axis '") + name + "' is empty");
    }
    for (double f : axes.fee_bps) {
        if (!(f >= 0.0 && f < 1e4)) throw ConfigError("sweep: fee_bps values must be in [0, 10000)");
    }
    for (double t : axes.tau_cex_bps) {
        if (!(t >= 0.0 && t < 1e4)) throw ConfigError("sweep: tau_cex_bps values must be in [0, 10000)");
    }
    if (!(initial_value > 0.0)) throw ConfigError("sweep: initial value must be positive");
    for (std::size_t m = 0; m < axes.memory_days.size(); ++m) {
        for (std::size_t k = 0; k < axes.k.size(); ++k) {
            make_cell_config(*this, {m, k, 0, 0, 0, 0}).strategy.validate(n_assets);
        }
    }
    for (double g : axes.gas_usd) ArbParams{g, discovery_delay_steps, 0.0}.validate();
    for (double nu : axes.nu) ArbParams{0.0, discovery_delay_steps, nu}.validate();
    CexCostParams{0.0, spreads}.validate(n_assets);
}

CellIndex cell_at(const SweepGrid& grid, std::size_t flat) {
    const auto& a = grid.axes;
    CellIndex c;
    c.nu = flat % a.nu.size(); flat /= a.nu.size();
    c.tau = flat % a.tau_cex_bps.size(); flat /= a.tau_cex_bps.size();
    c.gas = flat % a.gas_usd.size(); flat /= a.gas_usd.size();
    c.fee = flat % a.fee_bps.size(); flat /= a.fee_bps.size();
    c.k = flat % a.k.size(); flat /= a.k.size();
    c.memory = flat;
    return c;
}

std::size_t flat_index(const SweepGrid& grid, const CellIndex& c) {
    const auto& a = grid.axes;
    std::size_t flat = c.memory;
    flat = flat * a.k.size() + c.k;
    flat = flat * a.fee_bps.size() + c.fee;
    flat = flat * a.gas_usd.size() + c.gas;
    flat = flat * a.tau_cex_bps.size() + c.tau;
    flat = flat * a.nu.size() + c.nu;
    return flat;
}

CellConfig make_cell_config(const SweepGrid& grid, const CellIndex& cell) {
    const auto& a = grid.axes;
    CellConfig cfg;
    cfg.strategy = grid.strategy;
    cfg.strategy.memory_days = a.memory_days[cell.memory];
    cfg.strategy.aggressiveness = a.k[cell.k];
    cfg.gamma = gamma_from_bps(a.fee_bps[cell.fee]);
    cfg.arb = {a.gas_usd[cell.gas], grid.discovery_delay_steps, a.nu[cell.nu]};
    cfg.cex = {a.tau_cex_bps[cell.tau] / 1e4, grid.spreads};
    cfg.initial_value = grid.initial_value;
    return cfg;
}

SummaryRow cell_coordinates(const SweepGrid& grid, const CellIndex& cell) {
    const auto& a = grid.axes;
    SummaryRow row;
    row.strategy_id = cell.memory * a.k.size() + cell.k;
    row.memory_days = a.memory_days[cell.memory];
    row.k = a.k[cell.k];
    row.fee_bps = a.fee_bps[cell.fee];
    row.gas_usd = a.gas_usd[cell.gas];
    row.tau_cex_bps = a.tau_cex_bps[cell.tau];
    row.nu = a.nu[cell.nu];
    return row;
}

std::string describe_cell(const SummaryRow& c) {
    return "cell(strategy_id=" + std::to_string(c.strategy_id) + ", memory_days=" + format_double(c.memory_days) +
           ", k=" + format_double(c.k) + ", fee_bps=" + format_double(c.fee_bps) +
           ", gas_usd=" + format_double(c.gas_usd) + ", tau_cex_bps=" + format_double(c.tau_cex_bps) +
           ", nu=" + format_double(c.nu) + ")";
}

CellRun run_cell(const PriceSeries& series, const CellConfig& config, bool keep_logs) {
    CellRun run;
    run.trajectory = build_trajectory(config.strategy, series);
    run.amm = run_amm(series, run.trajectory, config.gamma, config.arb, config.initial_value, keep_logs);
    run.cex = run_cex(series, run.trajectory, config.cex, config.initial_value, keep_logs);
    run.lvr = lvr_reference(series, run.trajectory, config.initial_value);
    run.summary = summarize({config.initial_value, run.amm.values.back(), run.cex.values.back(), run.lvr.back(),
                             run.amm.volume_usd, series.duration_minutes()});
    return run;
}

std::vector<SweepRow> run_grid(const PriceSeries& series, const SweepGrid& grid, const SweepOptions& options) {
    grid.validate(series.assets());
    const auto& a = grid.axes;
    const std::size_t total = grid.cell_count();
    const std::size_t n_strategies = grid.strategy_count();
    const std::size_t pool_jobs = a.fee_bps.size() * a.gas_usd.size() * a.nu.size();
    const std::size_t cex_jobs = a.tau_cex_bps.size();
    const std::size_t batch = std::max<std::size_t>(options.workers, 1);

    struct PoolResult {
        double final_value = 0.0;
        double volume = 0.0;
        double noise = 0.0;
        std::size_t trades = 0;
    };
    struct CexResult {
        double final_value = 0.0;
        double max_residual = 0.0;
    };
    struct StrategyWork {
        std::size_t memory = 0, k = 0;
        WeightTrajectory trajectory{0, 0};
        double final_lvr = 0.0;
        std::vector<PoolResult> pools;
        std::vector<CexResult> cexes;
    };

    std::vector<SweepRow> rows;
    rows.reserve(total);
    std::size_t last_flush = 0;

    auto fail = [&](const std::string& where, const std::exception_ptr& e) {
        if (!options.partial_path.empty()) write_rows(options.partial_path, rows);
        throw CellError(where + ": " + what_of(e));
    };

    for (std::size_t first = 0; first < n_strategies; first += batch) {
        const std::size_t count = std::min(batch, n_strategies - first);
        std::vector<StrategyWork> work(count);
        for (std::size_t s = 0; s < count; ++s) {
            work[s].memory = (first + s) / a.k.size();
            work[s].k = (first + s) % a.k.size();
            work[s].pools.resize(pool_jobs);
            work[s].cexes.resize(cex_jobs);
        }

        std::vector<std::exception_ptr> traj_errors(count);
        parallel_for(count, options.workers, [&](std::size_t s) {
            auto& w = work[s];
            try {
                const auto cfg = make_cell_config(grid, {w.memory, w.k, 0, 0, 0, 0});
                w.trajectory = build_trajectory(cfg.strategy, series);
                w.final_lvr = lvr_reference(series, w.trajectory, grid.initial_value).back();
            } catch (...) {
                traj_errors[s] = std::current_exception();
            }
        });
        for (std::size_t s = 0; s < count; ++s) {
            if (traj_errors[s]) {
                fail(describe_cell(cell_coordinates(grid, {work[s].memory, work[s].k, 0, 0, 0, 0})) +
                         " (trajectory, all cost settings)",
                     traj_errors[s]);
            }
        }

        const std::size_t per_strategy = pool_jobs + cex_jobs;
        std::vector<std::exception_ptr> job_errors(count * per_strategy);
        parallel_for(count * per_strategy, options.workers, [&](std::size_t job) {
            auto& w = work[job / per_strategy];
            const std::size_t j = job % per_strategy;
            try {
                if (j < pool_jobs) {
                    CellIndex c{w.memory, w.k, j / (a.gas_usd.size() * a.nu.size()),
                                (j / a.nu.size()) % a.gas_usd.size(), 0, j % a.nu.size()};
                    const auto cfg = make_cell_config(grid, c);
                    const auto run = run_amm(series, w.trajectory, cfg.gamma, cfg.arb, grid.initial_value);
                    w.pools[j] = {run.values.back(), run.volume_usd, run.noise_income_usd, run.trades};
                } else {
                    CellIndex c{w.memory, w.k, 0, 0, j - pool_jobs, 0};
                    const auto cfg = make_cell_config(grid, c);
                    const auto run = run_cex(series, w.trajectory, cfg.cex, grid.initial_value);
                    w.cexes[j - pool_jobs] = {run.values.back(), run.max_relative_residual};
                }
            } catch (...) {
                job_errors[job] = std::current_exception();
            }
        });
        for (std::size_t job = 0; job < job_errors.size(); ++job) {
            if (!job_errors[job]) continue;
            const auto& w = work[job / per_strategy];
            const std::size_t j = job % per_strategy;
            CellIndex c{w.memory, w.k, 0, 0, 0, 0};
            std::string part;
            if (j < pool_jobs) {
                c.fee = j / (a.gas_usd.size() * a.nu.size());
                c.gas = (j / a.nu.size()) % a.gas_usd.size();
                c.nu = j % a.nu.size();
                part = " (pool run, all tau_cex_bps)";
            } else {
                c.tau = j - pool_jobs;
                part = " (cex run, all pool settings)";
            }
            fail(describe_cell(cell_coordinates(grid, c)) + part, job_errors[job]);
        }

        for (const auto& w : work) {
            for (std::size_t fee = 0; fee < a.fee_bps.size(); ++fee)
                for (std::size_t gas = 0; gas < a.gas_usd.size(); ++gas)
                    for (std::size_t tau = 0; tau < a.tau_cex_bps.size(); ++tau)
                        for (std::size_t nu = 0; nu < a.nu.size(); ++nu) {
                            const CellIndex c{w.memory, w.k, fee, gas, tau, nu};
                            const auto& pool = w.pools[(fee * a.gas_usd.size() + gas) * a.nu.size() + nu];
                            const auto& cex = w.cexes[tau];
                            SweepRow row;
                            row.row = cell_coordinates(grid, c);
                            row.row.summary = summarize({grid.initial_value, pool.final_value, cex.final_value,
                                                         w.final_lvr, pool.volume, series.duration_minutes()});
                            row.max_fixed_point_residual = cex.max_residual;
                            row.pool_trades = pool.trades;
                            row.noise_income_usd = pool.noise;
                            rows.push_back(std::move(row));
                        }
        }

        if (options.flush_every > 0 && !options.partial_path.empty() &&
            rows.size() - last_flush >= options.flush_every && rows.size() < total) {
            write_rows(options.partial_path, rows);
            last_flush = rows.size();
        }
        if (options.progress) options.progress(rows.size(), total);
    }

    if (!options.partial_path.empty()) {
        std::error_code ec;
        std::filesystem::remove(options.partial_path, ec);
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    write_summary_header(out);
    for (const auto& r : rows) write_summary_row(out, r.row);
}

}  // namespace rvr
