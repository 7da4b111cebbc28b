#include <cmath>
#include <vector>

#include "backtest.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "report_io.hpp"

using namespace gridtrade;
using namespace gridtrade::backtest;
using gridtrade::market::CandleSeries;
using gridtrade::market::Decimal;
using gridtrade::market::kMinuteMs;
using doctest::Approx;

namespace {

// One candle per close, spaced `step_ms` apart.
CandleSeries series_of(const std::vector<double>& closes, std::int64_t step_ms = kMinuteMs) {
    CandleSeries s;
    s.symbol = "TEST";
    double prev = closes.front();
    for (std::size_t i = 0; i < closes.size(); ++i) {
        market::Candle c;
        c.open_time = static_cast<std::int64_t>(i) * step_ms;
        c.close_time = c.open_time + step_ms - 1;
        c.open = Decimal::from_double(prev);
        c.close = Decimal::from_double(closes[i]);
        c.high = Decimal::from_double(std::max(prev, closes[i]));
        c.low = Decimal::from_double(std::min(prev, closes[i]));
        c.volume = Decimal::parse("1");
        s.candles.push_back(c);
        prev = closes[i];
    }
    return s;
}

CandleSeries walk(std::int64_t steps, std::uint64_t seed, double k = 0.002) {
    market::WalkParams p;
    p.n_steps = steps;
    p.seed = seed;
    p.step_ratio = k;
    return market::synth_random_walk(p);
}

} // namespace

TEST_CASE("irr definition") {
    CHECK(irr(100, 200, kMsPerYear) == 1.0);
    CHECK(irr(100, 200, 2 * kMsPerYear) == Approx(std::sqrt(2.0) - 1).epsilon(1e-15));
    CHECK(irr(100, 100, 12345) == 0.0);
    CHECK_THROWS_AS(irr(100, 0, kMsPerYear), std::invalid_argument);
    CHECK_THROWS_AS(irr(100, 110, 0), std::invalid_argument);
}

TEST_CASE("mdd definition") {
    const std::vector<double> a{100, 120, 60, 90};
    CHECK(mdd(a) == 0.5);
    const std::vector<double> b{100, 50, 100, 40};
    CHECK(mdd(b) == 0.6);
    const std::vector<double> rising{1, 2, 3, 4, 5};
    CHECK(mdd(rising) == 0.0);
    const std::vector<EquityPoint> curve{{0, 100}, {1, 120}, {2, 60}};
    CHECK(mdd(curve) == 0.5);
}

TEST_CASE("constant series") {
    const auto s = series_of(std::vector<double>(500, 100.0));
    for (auto strategy : {Strategy::dgt, Strategy::traditional}) {
        const auto r = run_backtest(s, grid::GridSpec::symmetric(0.01, 5, 1000, 0.0), strategy);
        CHECK(r.trade_count == 0);
        CHECK(r.irr == 0.0);
        CHECK(r.mdd == 0.0);
        CHECK(r.final_status == grid::Status::active);
    }
}

TEST_CASE("buy and hold") {
    SUBCASE("flat with fee pays one fee") {
        const auto r = run_buy_and_hold(series_of({100, 100, 100}), 1000, 0.0008);
        CHECK(r.final_equity == Approx(1000 * (1 - 0.0008)).epsilon(1e-15));
        CHECK(r.trade_count == 0);
    }
    SUBCASE("doubling in one year") {
        const auto r = run_buy_and_hold(series_of({100, 200}, kMsPerYear), 1000, 0.0);
        CHECK(r.irr == Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("rising series has no drawdown") {
        const auto r = run_buy_and_hold(series_of({100, 101, 105, 110}), 1000, 0.0008);
        CHECK(r.mdd == 0.0);
    }
}

TEST_CASE("dgt up-only walk resets after n_above sells") {
    const int half = 4;
    market::WalkParams p;
    p.step_ratio = 0.01;
    p.p_up = 1.0;
    p.n_steps = half + 1;
    const auto s = market::synth_random_walk(p);
    auto closes = s.closes();
    closes.insert(closes.begin(), p.start_price);
    const auto series = series_of(closes);
    const auto r = run_backtest(series, grid::GridSpec::symmetric(0.01, half, 1000, 0.0), Strategy::dgt);
    std::vector<grid::Fill> grid_fills;
    for (const auto& f : r.fills) {
        if (f.kind == grid::FillKind::grid) grid_fills.push_back(f);
    }
    REQUIRE(grid_fills.size() == static_cast<std::size_t>(half));
    for (const auto& f : grid_fills) CHECK(f.side == grid::Side::sell);
    REQUIRE(r.reset_count == 1);
    CHECK(r.reset_snapshots[0].direction == grid::Direction::up);
    CHECK(r.reset_snapshots[0].time_ms == series.candles.back().close_time);
}

TEST_CASE("replay is deterministic") {
    const auto s = walk(20'000, 4);
    const auto spec = grid::GridSpec::symmetric(0.005, 6, 1000, 0.0008);
    CHECK(run_backtest(s, spec, Strategy::dgt) == run_backtest(s, spec, Strategy::dgt));
    CHECK(run_backtest(s, spec, Strategy::traditional) == run_backtest(s, spec, Strategy::traditional));
    CHECK(io::to_json(run_backtest(s, spec, Strategy::dgt)).dump() ==
          io::to_json(run_backtest(s, spec, Strategy::dgt)).dump());
}

TEST_CASE("report invariants") {
    const auto s = walk(30'000, 8);
    const auto spec = grid::GridSpec::symmetric(0.004, 5, 1000, 0.0008);
    for (auto strategy : {Strategy::dgt, Strategy::traditional}) {
        const auto r = run_backtest(s, spec, strategy, {7, true});
        CHECK(r.mdd >= 0.0);
        CHECK(r.mdd <= 1.0);
        CHECK(std::isfinite(r.irr));
        for (const auto& p : r.equity_curve) CHECK(p.equity > 0.0);
        CHECK(r.equity_curve.back().time_ms == s.candles.back().close_time);
        CHECK(r.equity_curve.size() == (s.size() + 6) / 7 + ((s.size() - 1) % 7 != 0 ? 1 : 0));
        CHECK(r.mdd >= mdd(r.equity_curve));
        std::uint64_t grid_fills = 0;
        for (const auto& f : r.fills) grid_fills += f.kind == grid::FillKind::grid ? 1 : 0;
        CHECK(r.trade_count == grid_fills);
        if (strategy == Strategy::dgt) {
            CHECK(r.final_status == grid::Status::active);
        }
    }
    const auto no_curve = run_backtest(s, spec, Strategy::dgt, {0, false});
    CHECK(no_curve.equity_curve.empty());
    CHECK(no_curve.fills.empty());
    CHECK(no_curve.mdd == run_backtest(s, spec, Strategy::dgt).mdd);
}

TEST_CASE("traditional grid terminates and holds") {
    std::vector<double> closes{100};
    for (int i = 1; i <= 10; ++i) closes.push_back(100 * std::pow(1.01, i));
    closes.push_back(90);
    const auto r = run_backtest(series_of(closes), grid::GridSpec::symmetric(0.01, 3, 1000, 0.0), Strategy::traditional);
    CHECK(r.final_status == grid::Status::terminated_above);
    REQUIRE(r.terminated_at_ms);
    CHECK(r.equity_curve.back().equity == Approx(r.equity_curve[5].equity).epsilon(1e-15));
}

TEST_CASE("dgt rejects an asymmetric grid") {
    auto spec = grid::GridSpec::symmetric(0.01, 3, 1000, 0.0);
    spec.n_above = 4;
    CHECK_THROWS_AS(run_backtest(walk(10, 1), spec, Strategy::dgt), std::invalid_argument);
    CHECK_THROWS_AS(run_backtest(CandleSeries{}, grid::GridSpec{}, Strategy::dgt), DataError);
}

TEST_CASE("fixed-bound grid size") {
    CHECK(fixed_bound_grid_size(10'000, 80'000, 20) == Approx(std::pow(8.0, 0.05) - 1).epsilon(1e-15));
    CHECK(fixed_bound_grid_size(10'000, 80'000, 20) == Approx(0.1097).epsilon(1e-3));
    CHECK(fixed_bound_grid_size(500, 5'000, 10) == Approx(std::pow(10.0, 0.1) - 1).epsilon(1e-15));
    CHECK(fixed_bound_grid_size(500, 5'000, 10) == Approx(0.2589).epsilon(1e-3));
}

TEST_CASE("fixed-bound fees never help") {
    market::WalkParams p;
    p.n_steps = 50'000;
    p.step_ratio = 0.002;
    p.seed = 21;
    const auto s = market::synth_random_walk(p);
    const auto free = run_fixed_bound_grid(s, 50, 200, 20, 1000, 0.0);
    const auto paid = run_fixed_bound_grid(s, 50, 200, 20, 1000, 0.0008);
    CHECK(free.trade_count > 0);
    CHECK(free.final_equity >= paid.final_equity);
    CHECK(free.strategy == Strategy::fixed_bound);
    CHECK(free.n_above + free.n_below == 20);
}

TEST_CASE("sweep cells equal standalone runs") {
    const auto s = walk(20'000, 17);
    const std::vector<double> ks{0.003, 0.01};
    const std::vector<int> hs{3, 6};
    SweepOptions o;
    const auto sweep = run_sweep(s, ks, hs, 1000, 0.0008, Strategy::dgt, o);
    REQUIRE(sweep.cells.size() == 4);
    for (std::size_t i = 0; i < ks.size(); ++i) {
        for (std::size_t j = 0; j < hs.size(); ++j) {
            const auto spec = sweep_cell_spec(ks[i], hs[j], 1000, 0.0008, o);
            CHECK(sweep.at(i, j) == run_backtest(s, spec, Strategy::dgt, o.replay));
        }
    }
}

TEST_CASE("parallel sweep equals serial") {
    const auto s = walk(20'000, 23);
    const auto ks = default_sweep_grid_sizes();
    const auto hs = default_sweep_half_counts();
    SweepOptions serial;
    SweepOptions parallel;
    parallel.jobs = 4;
    CHECK(run_sweep(s, ks, hs, 1000, 0.0008, Strategy::dgt, serial) ==
          run_sweep(s, ks, hs, 1000, 0.0008, Strategy::dgt, parallel));
    CHECK(io::sweep_csv(run_sweep(s, ks, hs, 1000, 0.0008, Strategy::traditional, serial)) ==
          io::sweep_csv(run_sweep(s, ks, hs, 1000, 0.0008, Strategy::traditional, parallel)));
}

TEST_CASE("degenerate sweep cells") {
    const auto s = walk(50, 2);
    const std::vector<double> ks{0.5};
    const std::vector<int> hs{1};
    const auto sweep = run_sweep(s, ks, hs, 1000, 0.0008, Strategy::dgt);
    CHECK(sweep.cells[0].trade_count == 0);
    const std::vector<double> bad{1.5};
    CHECK_THROWS_AS(run_sweep(s, bad, hs, 1000, 0.0008, Strategy::dgt), std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(s, ks, hs, 1000, 0.0008, Strategy::buy_and_hold), std::invalid_argument);
}

TEST_CASE("dgt beats the traditional grid on rise-fall-rise") {
    std::vector<double> closes;
    auto leg = [&](double from, double to, int steps) {
        for (int i = 0; i < steps; ++i) closes.push_back(from * std::pow(to / from, double(i) / steps));
    };
    leg(100, 130, 60);
    leg(130, 100, 60);
    leg(100, 130, 60);
    closes.push_back(130);
    const auto s = series_of(closes);
    const auto spec = grid::GridSpec::symmetric(0.01, 4, 1000, 0.0);
    const auto trad = run_backtest(s, spec, Strategy::traditional);
    const auto dgt = run_backtest(s, spec, Strategy::dgt);
    CHECK(trad.final_status == grid::Status::terminated_above);
    CHECK(dgt.reset_count >= 2);
    CHECK(dgt.final_equity >= trad.final_equity);
}

TEST_CASE("report serialization") {
    const auto s = walk(2'000, 3);
    const auto r = run_backtest(s, grid::GridSpec::symmetric(0.004, 3, 1000, 0.0008), Strategy::dgt);
    const auto j = io::to_json(r);
    CHECK(j["strategy"] == "dgt");
    CHECK(j["trade_count"] == r.trade_count);
    CHECK(j["equity_curve"].size() == r.equity_curve.size());
    const auto csv = io::report_csv(r);
    CHECK(csv.rfind(io::kSweepCsvHeader, 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(parse_strategy("buyhold") == Strategy::buy_and_hold);
    CHECK_FALSE(parse_strategy("nope"));
}
