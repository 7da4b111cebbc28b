// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "analytics.hpp"
#include "backtest.hpp"
#include "grid_engine.hpp"
#include "market_data.hpp"
#include "report_io.hpp"
#include "rng.hpp"

using namespace gridtrade;

namespace {

constexpr double kSigmas = 3.0;             // Monte Carlo agreement band
constexpr std::uint64_t kMcTrials = 100'000;
constexpr double kFeeRate = 0.0008;
constexpr double kConservationRel = 1e-9;   // fee-free value conservation per fill
constexpr double kFeeDeficitRel = 1e-12;    // fee deficit vs fee_paid per fill
constexpr double kResetRel = 1e-9;          // reset wallet arithmetic
constexpr std::int64_t kConservationCandles = 10'000;
constexpr std::int64_t kLivenessCandles = 1'000'000;
const std::vector<int> kMcGridCounts{2, 4, 6, 8, 12};

struct Result {
    bool pass = true;
    std::string detail;
};

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1.0});
}

std::string fmt(const char* format, double a = 0, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

market::CandleSeries series_of(const std::vector<double>& closes) {
    market::CandleSeries s;
    s.symbol = "SCRIPT";
    double prev = closes.front();
    for (std::size_t i = 0; i < closes.size(); ++i) {
        market::Candle c;
        c.open_time = static_cast<std::int64_t>(i) * market::kMinuteMs;
        c.close_time = c.open_time + market::kMinuteMs - 1;
        c.open = market::Decimal::from_double(prev);
        c.close = market::Decimal::from_double(closes[i]);
        c.high = market::Decimal::from_double(std::max(prev, closes[i]));
        c.low = market::Decimal::from_double(std::min(prev, closes[i]));
        c.volume = market::Decimal::parse("1");
        s.candles.push_back(c);
        prev = closes[i];
    }
    return s;
}

Result closed_forms() {
    Result r;
    const double m = 600;
    const int n = 6;
    r.pass = analytics::profit_upper(m, n) == 600 && analytics::loss_lower(m, n) == 1200 &&
             analytics::linear_ev(m, n) == -300 && analytics::required_arbitrages(n) == 3 &&
             analytics::expected_crossings(n) == 9;
    r.detail = fmt("P_u=%g L_l=%g E(G)=%g", analytics::profit_upper(m, n), analytics::loss_lower(m, n),
                   analytics::linear_ev(m, n)) +
               fmt(" arbitrages=%g E_0=%g", analytics::required_arbitrages(n), analytics::expected_crossings(n));
    return r;
}

Result arbitrage_identity() {
    Result r;
    int checked = 0;
    for (int n = 2; n <= 200; n += 2, ++checked) {
        if (analytics::expected_arbitrage_value(n) != analytics::required_arbitrages(n)) {
            r.pass = false;
            r.detail = "mismatch at n=" + std::to_string(n);
            return r;
        }
    }
    r.detail = std::to_string(checked) + " even n in [2, 200], exact";
    return r;
}

Result recurrence() {
    Result r;
    for (int n = 2; n <= 40; n += 2) {
        const auto e = analytics::solve_recurrence(n);
        const double e0 = static_cast<double>(n / 2) * (n / 2);
        for (std::size_t m = 0; m < e.size(); ++m) {
            if (e[m] != e0 - static_cast<double>(m * m)) {
                r.pass = false;
                r.detail = "n=" + std::to_string(n) + " m=" + std::to_string(m);
                return r;
            }
        }
    }
    r.detail = "E_m = E_0 - m^2 exact for even n in [2, 40]";
    return r;
}

Result first_passage() {
    Result r;
    for (int n : kMcGridCounts) {
        const auto s = analytics::mc_first_passage(n, kMcTrials, 1000 + n, {std::thread::hardware_concurrency()});
        const double target = static_cast<double>(n) * n / 4.0;
        const bool ok = std::abs(s.mean_steps - target) <= kSigmas * s.std_error;
        r.pass = r.pass && ok;
        r.detail += "n=" + std::to_string(n) + fmt(": %.4f vs %g (se %.4f)", s.mean_steps, target, s.std_error) +
                    (ok ? "; " : " OUT; ");
    }
    return r;
}

Result zero_ev() {
    Result r;
    for (int n : kMcGridCounts) {
        analytics::TheoryParams p;
        p.n = n;
        p.principal = 600;
        p.step_ratio = 0.01;
        p.fee_rate = 0.0;
        const auto free = analytics::mc_grid_ev(p, kMcTrials, 2000 + n, {std::thread::hardware_concurrency()});
        p.fee_rate = kFeeRate;
        const auto paid = analytics::mc_grid_ev(p, kMcTrials, 2000 + n, {std::thread::hardware_concurrency()});
        const bool ok = std::abs(free.mean_pnl) <= kSigmas * free.std_error && paid.mean_pnl < 0.0;
        r.pass = r.pass && ok;
        r.detail += "n=" + std::to_string(n) +
                    fmt(": %.3f (se %.3f), fee %.3f", free.mean_pnl, free.std_error, paid.mean_pnl) +
                    (ok ? "; " : " OUT; ");
    }
    return r;
}

Result conservation() {
    Result r;
    std::uint64_t fills = 0;
    double worst_free = 0, worst_fee = 0;
    for (double fee : {0.0, kFeeRate}) {
        for (int half : {3, 8}) {
            market::WalkParams wp;
            wp.n_steps = kConservationCandles;
            wp.step_ratio = 0.003;
            wp.seed = 600 + half;
            const auto path = market::synth_random_walk(wp).closes();
            auto spec = grid::GridSpec::symmetric(0.004, half, 1000, fee);
            auto state = grid::PortfolioState::funded(spec.principal);
            std::optional<grid::Ladder> ladder = grid::build_ladder(wp.start_price, spec);
            grid::initial_allocation(state, *ladder, spec, wp.start_price, 0);
            for (std::size_t i = 0; i < path.size(); ++i) {
                const double q0 = state.quote, b0 = state.base;
                const auto out = grid::step_dgt(state, ladder, spec, {static_cast<std::int64_t>(i), path[i]});
                if (state.quote < 0 || state.base < 0 || state.carry_base < 0) {
                    r.pass = false;
                    r.detail = "negative balance";
                }
                if (out.status != grid::Status::active) continue;
                double q = q0, b = b0;
                for (const auto& f : out.events) {
                    const double before = q + b * f.price;
                    q += f.quote_delta;
                    b += f.side == grid::Side::buy ? f.base_qty : -f.base_qty;
                    const double after = q + b * f.price;
                    const double scale = std::max(std::abs(before), 1.0);
                    ++fills;
                    if (fee == 0.0) {
                        worst_free = std::max(worst_free, std::abs(after - before) / scale);
                        r.pass = r.pass && close_rel(after, before, kConservationRel);
                    } else {
                        const double deficit = before - after;
                        worst_fee = std::max(worst_fee, std::abs(deficit - f.fee_paid) /
                                                            std::max({std::abs(deficit), std::abs(f.fee_paid), 1.0}));
                        r.pass = r.pass && close_rel(deficit, f.fee_paid, kFeeDeficitRel);
                    }
                }
            }
        }
    }
    r.pass = r.pass && fills > 0;
    r.detail += std::to_string(fills) + " fills" + fmt(", worst rel error %.2e (fee 0), %.2e (fee deficit)",
                                                       worst_free, worst_fee);
    return r;
}

Result terminal_states() {
    const auto spec = grid::GridSpec::symmetric(0.01, 3, 1000, 0.0);
    Result r;
    {
        auto state = grid::PortfolioState::funded(spec.principal);
        auto ladder = grid::build_ladder(100, spec);
        grid::initial_allocation(state, ladder, spec, 100, 0);
        grid::Status st = grid::Status::active;
        std::int64_t t = 0;
        for (int i = 4; i <= 6 && st == grid::Status::active; ++i) {
            st = grid::step_traditional(state, ladder, spec, {++t, ladder.price(i)}).status;
        }
        st = grid::step_traditional(state, ladder, spec, {++t, ladder.top() * 1.01}).status;
        const bool ok = st == grid::Status::terminated_above && state.base == 0.0;
        r.pass = r.pass && ok;
        r.detail += fmt("up: base=%g; ", state.base);
    }
    {
        auto state = grid::PortfolioState::funded(spec.principal);
        auto ladder = grid::build_ladder(100, spec);
        grid::initial_allocation(state, ladder, spec, 100, 0);
        grid::Status st = grid::Status::active;
        std::int64_t t = 0;
        for (int i = 2; i >= 0; --i) st = grid::step_traditional(state, ladder, spec, {++t, ladder.price(i)}).status;
        st = grid::step_traditional(state, ladder, spec, {++t, ladder.bottom() * 0.99}).status;
        const bool ok = st == grid::Status::terminated_below && state.quote == 0.0;
        r.pass = r.pass && ok;
        r.detail += fmt("down: quote=%g", state.quote);
    }
    return r;
}

Result dgt_liveness() {
    Result r;
    const double m = 1000;
    const auto spec = grid::GridSpec::symmetric(0.01, 4, m, 0.0);
    auto state = grid::PortfolioState::funded(m);
    std::optional<grid::Ladder> ladder = grid::build_ladder(100, spec);
    grid::initial_allocation(state, *ladder, spec, 100, 0);
    std::int64_t t = 0;
    for (int i = 5; i <= 8; ++i) grid::step_dgt(state, ladder, spec, {++t, ladder->price(i)});
    const double breakout = ladder->top() * 1.005;
    const double equity_before = state.grid_equity(breakout);
    const double wallet_before = state.wallet;
    const auto up = grid::step_dgt(state, ladder, spec, {++t, breakout});
    const bool up_ok = up.status == grid::Status::reset_above && ladder.has_value() &&
                       close_rel(state.wallet - wallet_before, equity_before - m, kResetRel) &&
                       state.principal == m && ladder->black_price() == breakout && state.input_money == m;
    r.detail += fmt("up: wallet +%.6f (equity-M %.6f); ", state.wallet - wallet_before, equity_before - m);

    const double wallet = state.wallet;
    for (int i = 3; i >= 0; --i) grid::step_dgt(state, ladder, spec, {++t, ladder->price(i)});
    const double base_before = state.base;
    const double leftover_quote = state.quote;
    const auto down = grid::step_dgt(state, ladder, spec, {++t, ladder->bottom() * 0.99});
    const bool down_ok = down.status == grid::Status::reset_below && ladder.has_value() &&
                         close_rel(state.carry_base, base_before, kResetRel) &&
                         close_rel(state.principal, wallet + leftover_quote, kResetRel) && state.wallet == 0.0 &&
                         state.input_money == m;
    r.detail += fmt("down: carry %.6f, new principal %.6f; ", state.carry_base, state.principal);

    bool alive = true;
    {
        const auto live_spec = grid::GridSpec::symmetric(0.005, 5, m, kFeeRate);
        auto s = grid::PortfolioState::funded(m);
        std::optional<grid::Ladder> l = grid::build_ladder(100, live_spec);
        grid::initial_allocation(s, *l, live_spec, 100, 0);
        Rng rng(derive_seed(8, 8));
        double price = 100;
        for (std::int64_t i = 0; i < kLivenessCandles; ++i) {
            price *= rng.coin() ? 1.003 : 1 / 1.003;
            const auto o = grid::step_dgt(s, l, live_spec, {i, price});
            if (o.status == grid::Status::terminated_above || o.status == grid::Status::terminated_below) alive = false;
            if (l && (l->black_index() < 0 || l->black_index() > l->grid_count())) alive = false;
        }
        r.detail += std::to_string(kLivenessCandles) + " candles, " + std::to_string(s.resets.size()) + " resets" +
                    (l ? "" : " (dormant)");
    }
    r.pass = up_ok && down_ok && alive;
    return r;
}

Result rise_fall_rise() {
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
    const auto trad = backtest::run_backtest(s, spec, backtest::Strategy::traditional);
    const auto dgt = backtest::run_backtest(s, spec, backtest::Strategy::dgt);
    Result r;
    r.pass = trad.final_status == grid::Status::terminated_above && dgt.final_equity >= trad.final_equity;
    r.detail = fmt("DGT %.4f vs traditional %.4f, ", dgt.final_equity, trad.final_equity) +
               std::to_string(dgt.reset_count) + " DGT resets";
    return r;
}

Result sweep_determinism() {
    market::WalkParams wp;
    wp.n_steps = 50'000;
    wp.step_ratio = 0.002;
    wp.seed = 10;
    const auto s = market::synth_random_walk(wp);
    const auto ks = backtest::default_sweep_grid_sizes();
    const auto hs = backtest::default_sweep_half_counts();
    backtest::SweepOptions serial;
    backtest::SweepOptions parallel;
    parallel.jobs = std::max(4u, std::thread::hardware_concurrency());
    const auto a = backtest::run_sweep(s, ks, hs, 1000, kFeeRate, backtest::Strategy::dgt, serial);
    const auto b = backtest::run_sweep(s, ks, hs, 1000, kFeeRate, backtest::Strategy::dgt, parallel);
    Result r;
    r.pass = a.cells.size() == 36 && a == b && io::sweep_csv(a) == io::sweep_csv(b) &&
             io::to_json(a).dump() == io::to_json(b).dump();
    r.detail = std::to_string(a.cells.size()) + " cells, serial vs " + std::to_string(parallel.jobs) + " workers";
    return r;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Result()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "closed forms for n=6, M=600", closed_forms},
        {2, "expected arbitrage value equals required arbitrages", arbitrage_identity},
        {3, "recurrence solution E_m = E_0 - m^2", recurrence},
        {4, "Monte Carlo first passage within 3 SE of n^2/4", first_passage},
        {5, "Monte Carlo zero EV without fees, negative with fees", zero_ev},
        {6, "engine conservation, fee accounting, non-negativity", conservation},
        {7, "traditional terminal states", terminal_states},
        {8, "DGT reset accounting and liveness", dgt_liveness},
        {9, "DGT >= traditional on rise-fall-rise", rise_fall_rise},
        {10, "parallel sweep bit-identical to serial", sweep_determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Result r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += r.pass ? 0 : 1;
        std::printf("%s criterion %2d: %s [%.2fs] %s\n", r.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    r.detail.c_str());
    }
    std::printf("%s: %zu/%zu criteria passed\n", failures == 0 ? "ACCEPTED" : "REJECTED",
                criteria.size() - static_cast<std::size_t>(failures), criteria.size());
    return failures == 0 ? 0 : 1;
}
