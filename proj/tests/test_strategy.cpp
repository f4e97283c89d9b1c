#include "doctest.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "rvr/error.hpp"
#include "rvr/strategy.hpp"

using namespace rvr;

namespace {

void check_row_valid(std::span<const double> row, double min_weight) {
    const double n = static_cast<double>(row.size());
    const double hi = 1.0 - (n - 1.0) * min_weight;
    REQUIRE(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) <= 1e-9);
    for (double w : row) {
        REQUIRE(w >= min_weight - 1e-15);
        REQUIRE(w <= hi + 1e-15);
    }
}

// Every row of a one-minute series rises by the same log step in asset 0.
PriceSeries trending_series(std::size_t rows, double log_step) {
    std::vector<std::vector<double>> r;
    for (std::size_t t = 0; t < rows; ++t) r.push_back({std::exp(log_step * static_cast<double>(t)), 1.0});
    return testing::series_from_rows(r);
}

}  // namespace

TEST_CASE("strategy kind parsing") {
    CHECK(parse_strategy_kind("momentum") == StrategyKind::momentum);
    CHECK(parse_strategy_kind("constant") == StrategyKind::constant);
    CHECK(to_string(StrategyKind::momentum) == "momentum");
    CHECK_THROWS_AS(parse_strategy_kind("meanrev"), ConfigError);
}

TEST_CASE("StrategyParams validation") {
    auto p = testing::momentum_strategy({0.5, 0.5}, 1.0, 1.0);
    CHECK_NOTHROW(p.validate(2));
    CHECK_THROWS_AS(p.validate(3), ConfigError);
    auto q = p;
    q.base_weights = {0.5, 0.4};
    CHECK_THROWS_AS(q.validate(2), ConfigError);
    q = p;
    q.min_weight = 0.5;
    CHECK_THROWS_AS(q.validate(2), ConfigError);
    q = p;
    q.base_weights = {0.01, 0.99};
    CHECK_THROWS_AS(q.validate(2), ConfigError);  // outside clamp bounds
    q = p;
    q.interpolation_steps = 0;
    CHECK_THROWS_AS(q.validate(2), ConfigError);
    q = p;
    q.rebalance_interval = 0;
    CHECK_THROWS_AS(q.validate(2), ConfigError);
    q = p;
    q.memory_days = 0.0;
    CHECK_THROWS_AS(q.validate(2), ConfigError);
    q = p;
    q.aggressiveness = -1.0;
    CHECK_THROWS_AS(q.validate(2), ConfigError);
}

TEST_CASE("EWMA gradient examples") {
    const auto flat = testing::constant_series({10.0, 3.0, 1.0}, 200);
    for (double g : ewma_log_gradient(flat, 0.01, 150)) CHECK(g == 0.0);

    // Doubling every step: every increment is ln 2.
    std::vector<std::vector<double>> rows;
    for (int t = 0; t < 400; ++t) rows.push_back({std::ldexp(1.0, t), 1.0});
    const auto doubling = testing::series_from_rows(rows);
    const auto g = ewma_log_gradient(doubling, 0.05, 399);
    const auto o = oracle::direct_ewma(doubling, 0.05 * 1440.0, 399);
    CHECK(g[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(g[0] == doctest::Approx(o[0]).epsilon(1e-12));
    CHECK(g[1] == 0.0);

    CHECK(ewma_log_gradient(doubling, 1.0, 0) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("EWMA matches direct summation on random paths") {
    const auto s = generate_gbm(testing::three_asset_gbm(3000, 21));
    for (double mem : {0.001, 0.01, 0.3, 5.0}) {
        for (std::size_t step : {1u, 2u, 17u, 999u, 2999u}) {
            const auto g = ewma_log_gradient(s, mem, step);
            const auto o = oracle::direct_ewma(s, mem * 1440.0, step);
            for (std::size_t i = 0; i < 3; ++i) CHECK(g[i] == doctest::Approx(o[i]).epsilon(1e-9).scale(1e-12));
        }
    }
}

TEST_CASE("infinite memory is the running mean") {
    const auto s = generate_gbm(testing::three_asset_gbm(2000, 4));
    const auto g = ewma_log_gradient(s, std::numeric_limits<double>::infinity(), 1999);
    for (std::size_t i = 0; i < 3; ++i) {
        double sum = 0.0;
        for (std::size_t t = 1; t < 2000; ++t) sum += std::log(s.price(t, i)) - std::log(s.price(t - 1, i));
        CHECK(g[i] == doctest::Approx(sum / 1999.0).epsilon(1e-9).scale(1e-15));
    }
}

TEST_CASE("momentum target examples") {
    auto p = testing::momentum_strategy({0.5, 0.5}, 1.0, 1.0);
    const std::vector<double> g{0.01, -0.01};
    const auto raw = raw_momentum_target(p, g);
    CHECK(raw[0] == doctest::Approx(0.51).epsilon(1e-14));
    CHECK(raw[1] == doctest::Approx(0.49).epsilon(1e-14));
    CHECK(raw[0] + raw[1] == doctest::Approx(1.0).epsilon(1e-15));

    auto q = testing::momentum_strategy({0.3, 0.6, 0.1}, 1.0, 5.0);
    CHECK(momentum_target(q, std::vector<double>{0, 0, 0}) == q.base_weights);

    q.aggressiveness = 1e12;
    const auto pinned = momentum_target(q, std::vector<double>{1e-3, -1e-3, -1e-3});
    CHECK(pinned[0] == doctest::Approx(1.0 - 2 * 0.03));
    CHECK(pinned[1] == doctest::Approx(0.03));
    CHECK(pinned[2] == doctest::Approx(0.03));
    CHECK(std::accumulate(pinned.begin(), pinned.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    auto c = testing::constant_strategy({0.5, 0.5});
    CHECK_THROWS_AS(raw_momentum_target(c, g), ConfigError);
}

TEST_CASE("momentum monotonicity property") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    std::uniform_real_distribution<double> lk(0.0, 5.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 2 + trial % 4;
        auto p = testing::momentum_strategy(oracle::random_weights(rng, n, 0.05), 1.0, std::pow(10.0, lk(rng)));
        std::vector<double> g(n);
        for (auto& x : g) x = u(rng);
        const std::size_t i = trial % n;
        auto bumped = g;
        bumped[i] += std::abs(u(rng)) + 1e-6;
        const auto before = raw_momentum_target(p, g);
        const auto after = raw_momentum_target(p, bumped);
        REQUIRE(after[i] > before[i]);
        // The tilt is demeaned by the base-weighted mean, so the raw sum moves
        // by k (sum g - N <g>); clamp_normalize restores it.
        double sum_g = 0.0, mean_g = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sum_g += bumped[j];
            mean_g += p.base_weights[j] * bumped[j];
        }
        const double raw_sum = std::accumulate(after.begin(), after.end(), 0.0);
        REQUIRE(raw_sum - 1.0 ==
                doctest::Approx(p.aggressiveness * (sum_g - static_cast<double>(n) * mean_g)).epsilon(1e-6).scale(1e-9));
        // After clamping the target never decreases.
        REQUIRE(momentum_target(p, bumped)[i] >= momentum_target(p, g)[i] - 1e-12);
    }
}

TEST_CASE("clamp_normalize examples") {
    const std::vector<double> valid{0.2, 0.3, 0.5};
    CHECK(clamp_normalize(valid, 0.03) == valid);
    const auto two = clamp_normalize(std::vector<double>{-0.2, 1.2}, 0.05);
    CHECK(two[0] == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(two[1] == doctest::Approx(0.95).epsilon(1e-15));
    const std::vector<double> third{1.0 / 3, 1.0 / 3, 1.0 / 3};
    for (double m : {0.0001, 0.1, 0.3}) CHECK(clamp_normalize(third, m) == third);
}

TEST_CASE("clamp_normalize property") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 5000; ++trial) {
        const std::size_t n = 2 + trial % 6;
        const double m = 0.9 / static_cast<double>(n) * std::uniform_real_distribution<double>(0.01, 1.0)(rng);
        std::vector<double> raw(n);
        for (auto& x : raw) x = u(rng);
        const auto w = clamp_normalize(raw, m);
        check_row_valid(w, m);
        const auto again = clamp_normalize(w, m);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(again[i] == doctest::Approx(w[i]).epsilon(1e-12));
    }
}

TEST_CASE("constant and flat trajectories") {
    const auto s = generate_gbm(testing::three_asset_gbm(300, 1));
    const auto c = build_trajectory(testing::constant_strategy({0.3, 0.6, 0.1}), s);
    for (std::size_t t = 0; t < c.rows(); ++t) {
        const auto r = c.row(t);
        CHECK(std::vector<double>(r.begin(), r.end()) == std::vector<double>{0.3, 0.6, 0.1});
    }
    const auto flat = testing::constant_series({30000.0, 2000.0, 1.0}, 300);
    const auto m = build_trajectory(testing::momentum_strategy({0.3, 0.6, 0.1}, 0.1, 1e4, 10), flat);
    for (std::size_t t = 0; t < m.rows(); ++t) {
        const auto r = m.row(t);
        CHECK(std::vector<double>(r.begin(), r.end()) == std::vector<double>{0.3, 0.6, 0.1});
    }
}

TEST_CASE("single target change interpolates linearly") {
    // A steady trend gives g = (r, 0); k = 0.2 / r moves 50:50 to 60:40.
    const double r = 0.01;
    const auto s = trending_series(8, r);
    auto p = testing::momentum_strategy({0.5, 0.5}, 1.0, 0.2 / r, 4);
    const auto traj = build_trajectory(p, s);
    const double expected[] = {0.5, 0.5, 0.5, 0.5, 0.525, 0.55, 0.575, 0.6};
    for (std::size_t t = 0; t < 8; ++t) {
        CHECK(traj.row(t)[0] == doctest::Approx(expected[t]).epsilon(1e-12));
        CHECK(traj.row(t)[1] == doctest::Approx(1.0 - expected[t]).epsilon(1e-12));
    }
}

TEST_CASE("trajectory target uses only earlier prices") {
    const auto s = generate_gbm(testing::three_asset_gbm(1000, 8));
    auto p = testing::momentum_strategy({0.3, 0.6, 0.1}, 0.05, 300.0, 50);
    p.interpolation_steps = 1;
    const auto traj = build_trajectory(p, s);
    for (std::size_t t = 50; t < 1000; t += 50) {
        const auto want = momentum_target(p, ewma_log_gradient(s, p.memory_days, t - 1));
        for (std::size_t i = 0; i < 3; ++i) CHECK(traj.row(t)[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("anti-look-ahead property") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = generate_gbm(testing::three_asset_gbm(400, 100 + trial));
        auto p = testing::momentum_strategy({0.3, 0.6, 0.1}, 0.01 * (1 + trial), 50.0 * (1 + trial), 7 + trial);
        p.interpolation_steps = 1 + trial % 9;
        const auto full = build_trajectory(p, s);
        for (std::size_t cut : {p.rebalance_interval, std::size_t{137}, std::size_t{250}}) {
            const auto head = build_trajectory(p, s.truncated(cut + 1));
            for (std::size_t t = 0; t <= cut; ++t) {
                for (std::size_t i = 0; i < 3; ++i) REQUIRE(head.row(t)[i] == full.row(t)[i]);
            }
        }
        // Row t may not react to a shock at row t.
        std::vector<std::vector<double>> rows;
        for (std::size_t t = 0; t < s.steps(); ++t) rows.push_back({s.price(t, 0), s.price(t, 1), s.price(t, 2)});
        rows[200][0] *= 3.0;
        const auto shocked = build_trajectory(p, testing::series_from_rows(rows));
        for (std::size_t i = 0; i < 3; ++i) REQUIRE(shocked.row(200)[i] == full.row(200)[i]);
    }
}

TEST_CASE("every trajectory row is valid") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> lm(-2.0, 2.0);
    std::uniform_real_distribution<double> lk(1.0, 6.0);
    for (int trial = 0; trial < 40; ++trial) {
        const auto s = generate_gbm(testing::three_asset_gbm(2000, 500 + trial));
        auto p = testing::momentum_strategy(oracle::random_weights(rng, 3, 0.1), std::pow(10.0, lm(rng)),
                                            std::pow(10.0, lk(rng)), 1 + trial * 13);
        p.interpolation_steps = 1 + trial * 7;
        p.min_weight = 0.01 + 0.002 * trial;
        const auto traj = build_trajectory(p, s);
        for (std::size_t t = 0; t < traj.rows(); ++t) check_row_valid(traj.row(t), p.min_weight);
    }
}

TEST_CASE("trajectory errors and CSV") {
    const auto s = testing::constant_series({1.0, 2.0}, 5);
    CHECK_THROWS_AS(build_trajectory(testing::momentum_strategy({0.5, 0.5}, 1.0, 1.0, 10), s), ConfigError);
    const auto traj = build_trajectory(testing::constant_strategy({0.25, 0.75}), s.truncated(2));
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    CHECK(out.str() == "step,w_1,w_2\n0,0.25,0.75\n1,0.25,0.75\n");
}
