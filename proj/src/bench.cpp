#include "rvr/bench.hpp"

#include <ostream>

#include "rvr/error.hpp"
#include "rvr/format.hpp"

namespace rvr {

std::vector<double> lvr_reference(const PriceSeries& series, const WeightTrajectory& trajectory,
                                  double initial_value) {
    const std::size_t n = series.assets();
    if (trajectory.rows() != series.steps() || trajectory.assets() != n) {
        throw ConfigError("lvr_reference: trajectory shape does not match price series");
    }
    std::vector<double> values(series.steps());
    values[0] = initial_value;
    for (std::size_t t = 1; t < series.steps(); ++t) {
        const auto w = trajectory.row(t - 1);
        double v = values[t - 1];
        double gain = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double prev = series.price(t - 1, i);
            const double holding = w[i] * v / prev;
            gain += holding * (series.price(t, i) - prev);
        }
        values[t] = v + gain;
    }
    return values;
}

std::vector<double> rvr(std::span<const double> pool_values, std::span<const double> cex_values) {
    if (pool_values.size() != cex_values.size()) {
        throw std::invalid_argument("rvr: series lengths differ (" + std::to_string(pool_values.size()) + " vs " +
                                    std::to_string(cex_values.size()) + ")");
    }
    std::vector<double> out(pool_values.size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = pool_values[t] - cex_values[t];
    return out;
}

RunSummary summarize(const SummaryInputs& in) {
    if (!(in.initial_value > 0.0)) throw std::invalid_argument("summarize: initial value must be positive");
    RunSummary s;
    s.final_rvr_usd = in.final_pool - in.final_cex;
    s.scaled_rvr = s.final_rvr_usd / in.initial_value;
    s.pool_return = in.final_pool / in.initial_value - 1.0;
    s.cex_return = in.final_cex / in.initial_value - 1.0;
    s.lvr_usd = in.final_lvr - in.final_pool;
    s.pool_volume_usd = in.pool_volume_usd;
    s.monthly_volume_usd = in.duration_minutes > 0.0 ? in.pool_volume_usd * (30.0 * 1440.0 / in.duration_minutes)
                                                     : 0.0;
    return s;
}

void write_summary_header(std::ostream& out) {
    out << "strategy_id,memory_days,k,gamma_bps,gas_usd,tau_cex_bps,nu,final_rvr_usd,scaled_rvr,"
           "pool_return,cex_return,lvr_usd,monthly_volume_usd\n";
}

void write_summary_row(std::ostream& out, const SummaryRow& row) {
    const auto& s = row.summary;
    out << row.strategy_id << ',' << format_double(row.memory_days) << ',' << format_double(row.k) << ','
        << format_double(row.fee_bps) << ',' << format_double(row.gas_usd) << ','
        << format_double(row.tau_cex_bps) << ',' << format_double(row.nu) << ','
        << format_double(s.final_rvr_usd) << ',' << format_double(s.scaled_rvr) << ','
        << format_double(s.pool_return) << ',' << format_double(s.cex_return) << ','
        << format_double(s.lvr_usd) << ',' << format_double(s.monthly_volume_usd) << '\n';
}

}  // namespace rvr
