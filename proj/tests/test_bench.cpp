#include "doctest.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "helpers.hpp"
#include "rvr/amm.hpp"
#include "rvr/bench.hpp"
#include "rvr/cex.hpp"

using namespace rvr;

TEST_CASE("LVR reference examples") {
    const auto flat = testing::constant_series({5.0, 2.0}, 20);
    const auto traj = build_trajectory(testing::constant_strategy({0.4, 0.6}), flat);
    for (double v : lvr_reference(flat, traj, 100.0)) CHECK(v == 100.0);

    // 50:50 on (1,1) -> (1.1,1) -> (1.21,1): each step earns half of 10%.
    const auto path = testing::series_from_rows({{1.0, 1.0}, {1.1, 1.0}, {1.21, 1.0}});
    const auto half = build_trajectory(testing::constant_strategy({0.5, 0.5}), path);
    const auto v = lvr_reference(path, half, 1.0);
    double hand = 1.0;
    hand += 0.5 * hand / 1.0 * (1.1 - 1.0);
    CHECK(v[1] == doctest::Approx(hand).epsilon(1e-15));
    hand += 0.5 * hand / 1.1 * (1.21 - 1.1);
    CHECK(v[2] == doctest::Approx(hand).epsilon(1e-15));
    CHECK(v[2] == doctest::Approx(1.1025).epsilon(1e-14));
}

TEST_CASE("LVR reference is self-financing") {
    const auto s = generate_gbm(testing::three_asset_gbm(1000, 12));
    const auto traj = build_trajectory(testing::momentum_strategy({0.3, 0.6, 0.1}, 0.2, 800.0, 30), s);
    const auto v = lvr_reference(s, traj, 1e6);
    for (std::size_t t = 1; t < s.steps(); ++t) {
        double gain = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double h = traj.row(t - 1)[i] * v[t - 1] / s.price(t - 1, i);
            gain += h * (s.price(t, i) - s.price(t - 1, i));
        }
        REQUIRE(v[t] - v[t - 1] == doctest::Approx(gain).epsilon(1e-9).scale(1e-6));
    }
}

TEST_CASE("rvr examples") {
    const std::vector<double> x{1.0, 5.0, -2.0};
    for (double d : rvr::rvr(x, x)) CHECK(d == 0.0);
    const std::vector<double> up{101.0, 105.0, 98.0};
    for (double d : rvr::rvr(up, std::vector<double>{1.0, 5.0, -2.0})) CHECK(d == 100.0);
    CHECK_THROWS_AS(rvr::rvr(x, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("frictionless CEX beats the fee-free pool") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = generate_gbm(testing::three_asset_gbm(2000, 900 + seed));
        const auto traj = build_trajectory(testing::momentum_strategy({0.3, 0.6, 0.1}, 0.1, 3000.0, 30), s);
        ArbParams arb;
        arb.discovery_delay_steps = 0;
        const auto pool = run_amm(s, traj, 1.0, arb, 1e7);
        const auto cex = run_cex(s, traj, CexCostParams{0.0, {0, 0, 0}}, 1e7);
        for (double d : rvr::rvr(pool.values, cex.values)) REQUIRE(d <= 1e-9 * 1e7);
    }
}

TEST_CASE("summarize examples") {
    SummaryInputs in;
    in.initial_value = 10'000'000;
    in.final_pool = 10'100'000;
    in.final_cex = 10'050'000;
    in.final_lvr = 10'120'000;
    in.pool_volume_usd = 0.0;
    in.duration_minutes = 43200;
    const auto s = summarize(in);
    CHECK(s.final_rvr_usd == 50'000);
    CHECK(s.scaled_rvr == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(s.pool_return == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(s.cex_return == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(s.lvr_usd == 20'000);
    CHECK(s.monthly_volume_usd == 0.0);

    in.pool_volume_usd = 1e6;
    in.duration_minutes = 2 * 43200;
    CHECK(summarize(in).monthly_volume_usd == doctest::Approx(5e5));
    in.initial_value = 0.0;
    CHECK_THROWS(summarize(in));
}

TEST_CASE("pool return stays above -1") {
    const auto s = generate_gbm(testing::three_asset_gbm(3000, 5));
    const auto traj = build_trajectory(testing::constant_strategy({0.3, 0.6, 0.1}), s);
    const auto pool = run_amm(s, traj, 0.99, ArbParams{}, 1e6);
    const auto sum = summarize({1e6, pool.values.back(), 1e6, 1e6, pool.volume_usd, s.duration_minutes()});
    CHECK(sum.pool_return > -1.0);
    for (double r : pool.final_state.reserves) CHECK(r > 0.0);
}

TEST_CASE("summary CSV row") {
    std::ostringstream out;
    SummaryRow row;
    row.strategy_id = 3;
    row.memory_days = 10;
    row.k = 2000;
    row.fee_bps = 140;
    row.gas_usd = 1;
    row.tau_cex_bps = 10;
    row.nu = 0;
    row.summary.final_rvr_usd = 50000;
    row.summary.scaled_rvr = 0.005;
    row.summary.pool_return = 0.01;
    row.summary.cex_return = 0.005;
    row.summary.lvr_usd = 20000;
    row.summary.monthly_volume_usd = 1.5e6;
    write_summary_header(out);
    write_summary_row(out, row);
    CHECK(out.str() ==
          "strategy_id,memory_days,k,gamma_bps,gas_usd,tau_cex_bps,nu,final_rvr_usd,scaled_rvr,pool_return,"
          "cex_return,lvr_usd,monthly_volume_usd\n3,10,2000,140,1,10,0,50000,0.005,0.01,0.005,20000,1500000\n");
}
