#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "grid_engine.hpp"
#include "market_data.hpp"

namespace gridtrade::backtest {

inline constexpr std::int64_t kMsPerYear = 31'536'000'000; // 365 days

enum class Strategy { traditional, dgt, buy_and_hold, fixed_bound };

std::string_view to_string(Strategy strategy) noexcept;
std::optional<Strategy> parse_strategy(std::string_view name) noexcept;

struct EquityPoint {
    std::int64_t time_ms = 0;
    double equity = 0.0;

    bool operator==(const EquityPoint&) const = default;
};

struct BacktestReport {
    Strategy strategy = Strategy::dgt;
    grid::Status final_status = grid::Status::active;
    std::optional<std::int64_t> terminated_at_ms;

    double grid_size = 0.0;
    int n_above = 0;
    int n_below = 0;
    double fee_rate = 0.0;
    double principal = 0.0;

    double irr = 0.0;
    double mdd = 0.0;
    std::uint64_t trade_count = 0; // crossing-triggered fills; allocations excluded
    std::uint64_t reset_count = 0;
    double initial_equity = 0.0;
    double final_equity = 0.0;
    double final_wallet = 0.0;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::size_t candles = 0;

    std::vector<EquityPoint> equity_curve; // every `equity_stride`-th candle plus the last
    std::vector<grid::ResetSnapshot> reset_snapshots;
    std::vector<grid::Fill> fills;

    bool operator==(const BacktestReport&) const = default;
};

struct ReplayOptions {
    std::size_t equity_stride = 1; // 0 keeps no curve; MDD always uses every candle
    bool keep_fills = true;
};

// Replays the series; the grid starts at the first close. A terminated
// traditional grid keeps being marked to market until the last candle.
BacktestReport run_backtest(const market::CandleSeries& series, const grid::GridSpec& spec, Strategy strategy,
                            ReplayOptions options = {});

BacktestReport run_buy_and_hold(const market::CandleSeries& series, double principal, double fee_rate,
                                ReplayOptions options = {});

// Bottom level `lower`, top level `upper`, n grids, k = (upper/lower)^(1/n) - 1.
double fixed_bound_grid_size(double lower, double upper, int n);
BacktestReport run_fixed_bound_grid(const market::CandleSeries& series, double lower, double upper, int n,
                                    double principal, double fee_rate, ReplayOptions options = {});

// (final/initial)^(year/elapsed) - 1.
double irr(double initial_equity, double final_equity, std::int64_t elapsed_ms);

// max_t (peak_before_t - equity_t) / peak_before_t
double mdd(std::span<const double> equity);
double mdd(std::span<const EquityPoint> curve);

std::vector<double> default_sweep_grid_sizes();
std::vector<int> default_sweep_half_counts();

struct SweepOptions {
    unsigned jobs = 1;
    ReplayOptions replay{0, false};
    double minimum_principal = 10.0;
    int max_fills_per_candle = 0;
};

struct SweepGrid {
    Strategy strategy = Strategy::dgt;
    std::vector<double> grid_sizes;
    std::vector<int> half_counts;
    std::vector<BacktestReport> cells; // row-major: grid size outer, half count inner

    const BacktestReport& at(std::size_t size_index, std::size_t half_index) const {
        return cells.at(size_index * half_counts.size() + half_index);
    }
    // Highest-IRR cell.
    std::size_t best_index() const;

    bool operator==(const SweepGrid&) const = default;
};

grid::GridSpec sweep_cell_spec(double grid_size, int half, double principal, double fee_rate,
                               const SweepOptions& options);

SweepGrid run_sweep(const market::CandleSeries& series, std::span<const double> grid_sizes,
                    std::span<const int> half_counts, double principal, double fee_rate, Strategy strategy,
                    SweepOptions options = {});

} // namespace gridtrade::backtest
