#include "backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "errors.hpp"

namespace gridtrade::backtest {

std::string_view to_string(Strategy strategy) noexcept {
    switch (strategy) {
        case Strategy::traditional: return "traditional";
        case Strategy::dgt: return "dgt";
        case Strategy::buy_and_hold: return "buyhold";
        case Strategy::fixed_bound: return "fixed";
    }
    return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) noexcept {
    if (name == "traditional") return Strategy::traditional;
    if (name == "dgt") return Strategy::dgt;
    if (name == "buyhold") return Strategy::buy_and_hold;
    if (name == "fixed") return Strategy::fixed_bound;
    return std::nullopt;
}

double irr(double initial_equity, double final_equity, std::int64_t elapsed_ms) {
    if (!(initial_equity > 0.0) || !(final_equity > 0.0)) throw std::invalid_argument("equities must be positive");
    if (elapsed_ms <= 0) throw std::invalid_argument("elapsed time must be positive");
    return std::pow(final_equity / initial_equity, static_cast<double>(kMsPerYear) / static_cast<double>(elapsed_ms)) -
           1.0;
}

double mdd(std::span<const double> equity) {
    if (equity.empty()) throw std::invalid_argument("empty equity curve");
    double peak = equity.front();
    double worst = 0.0;
    for (const double e : equity) {
        peak = std::max(peak, e);
        worst = std::max(worst, (peak - e) / peak);
    }
    return worst;
}

double mdd(std::span<const EquityPoint> curve) {
    std::vector<double> values;
    values.reserve(curve.size());
    for (const auto& p : curve) values.push_back(p.equity);
    return mdd(values);
}

namespace {

// Streams equity into the report: full-resolution drawdown, strided curve.
class EquityRecorder {
public:
    EquityRecorder(BacktestReport& report, ReplayOptions options, std::size_t candles)
        : report_(report), options_(options), last_(candles - 1) {}

    void record(std::size_t index, std::int64_t time_ms, double equity) {
        peak_ = index == 0 ? equity : std::max(peak_, equity);
        worst_ = std::max(worst_, (peak_ - equity) / peak_);
        if (options_.equity_stride > 0 && (index % options_.equity_stride == 0 || index == last_)) {
            report_.equity_curve.push_back({time_ms, equity});
        }
        if (index == last_) {
            report_.final_equity = equity;
            report_.mdd = worst_;
        }
    }

private:
    BacktestReport& report_;
    ReplayOptions options_;
    std::size_t last_;
    double peak_ = 0.0;
    double worst_ = 0.0;
};

void finish(BacktestReport& report, const market::CandleSeries& series, grid::PortfolioState& state,
            ReplayOptions options) {
    report.start_ms = series.candles.front().close_time;
    report.end_ms = series.candles.back().close_time;
    report.candles = series.size();
    report.initial_equity = state.input_money;
    report.final_wallet = state.wallet;
    const auto elapsed = report.end_ms - report.start_ms;
    report.irr = elapsed > 0 ? irr(report.initial_equity, report.final_equity, elapsed) : 0.0;
    report.trade_count = static_cast<std::uint64_t>(std::count_if(
        state.fills.begin(), state.fills.end(), [](const grid::Fill& f) { return f.kind == grid::FillKind::grid; }));
    report.reset_snapshots = std::move(state.resets);
    report.reset_count = report.reset_snapshots.size();
    if (options.keep_fills) report.fills = std::move(state.fills);
}

void require_series(const market::CandleSeries& series) {
    if (series.empty()) throw DataError("cannot backtest an empty series");
}

void stamp_spec(BacktestReport& report, const grid::GridSpec& spec) {
    report.grid_size = spec.grid_size;
    report.n_above = spec.n_above;
    report.n_below = spec.n_below;
    report.fee_rate = spec.fee_rate;
    report.principal = spec.principal;
}

// Replays a traditional grid on an already-built ladder.
void replay_traditional(BacktestReport& report, const market::CandleSeries& series, const grid::GridSpec& spec,
                        grid::Ladder ladder, ReplayOptions options) {
    const auto& cs = series.candles;
    auto state = grid::PortfolioState::funded(spec.principal);
    grid::initial_allocation(state, ladder, spec, cs.front().close.value(), cs.front().close_time);

    EquityRecorder recorder(report, options, cs.size());
    bool trading = true;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const double close = cs[i].close.value();
        if (i > 0 && trading) {
            const auto outcome = grid::step_traditional(state, ladder, spec, {cs[i].close_time, close});
            if (outcome.status != grid::Status::active) {
                trading = false;
                report.final_status = outcome.status;
                report.terminated_at_ms = cs[i].close_time;
            }
        }
        recorder.record(i, cs[i].close_time, state.equity(close));
    }
    finish(report, series, state, options);
}

} // namespace

BacktestReport run_backtest(const market::CandleSeries& series, const grid::GridSpec& spec, Strategy strategy,
                            ReplayOptions options) {
    require_series(series);
    spec.validate();
    BacktestReport report;
    report.strategy = strategy;
    stamp_spec(report, spec);

    const auto& cs = series.candles;
    if (strategy == Strategy::traditional) {
        replay_traditional(report, series, spec, grid::build_ladder(cs.front().close.value(), spec), options);
        return report;
    }
    if (strategy != Strategy::dgt) throw std::invalid_argument("run_backtest handles traditional and dgt only");
    if (spec.n_above != spec.n_below) throw std::invalid_argument("DGT needs a symmetric grid (n_above == n_below)");

    auto state = grid::PortfolioState::funded(spec.principal);
    std::optional<grid::Ladder> ladder = grid::build_ladder(cs.front().close.value(), spec);
    grid::initial_allocation(state, *ladder, spec, cs.front().close.value(), cs.front().close_time);

    EquityRecorder recorder(report, options, cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const double close = cs[i].close.value();
        if (i > 0) grid::step_dgt(state, ladder, spec, {cs[i].close_time, close});
        recorder.record(i, cs[i].close_time, state.equity(close));
    }
    finish(report, series, state, options);
    return report;
}

BacktestReport run_buy_and_hold(const market::CandleSeries& series, double principal, double fee_rate,
                                ReplayOptions options) {
    require_series(series);
    if (!(principal > 0.0)) throw std::invalid_argument("principal must be > 0");
    if (!(fee_rate >= 0.0 && fee_rate < 1.0)) throw std::invalid_argument("fee_rate must be in [0, 1)");

    BacktestReport report;
    report.strategy = Strategy::buy_and_hold;
    report.fee_rate = fee_rate;
    report.principal = principal;

    const auto& cs = series.candles;
    auto state = grid::PortfolioState::funded(principal);
    const double entry = cs.front().close.value();
    grid::Fill buy;
    buy.time_ms = cs.front().close_time;
    buy.side = grid::Side::buy;
    buy.kind = grid::FillKind::allocation;
    buy.price = entry;
    buy.base_qty = principal * (1.0 - fee_rate) / entry;
    buy.quote_delta = -principal;
    buy.fee_paid = principal * fee_rate;
    state.quote = 0.0;
    state.base = buy.base_qty;
    state.fills.push_back(buy);

    EquityRecorder recorder(report, options, cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) {
        recorder.record(i, cs[i].close_time, state.base * cs[i].close.value());
    }
    finish(report, series, state, options);
    return report;
}

double fixed_bound_grid_size(double lower, double upper, int n) {
    if (!(lower > 0.0) || !(upper > lower) || n < 1) throw std::invalid_argument("need 0 < lower < upper and n >= 1");
    return std::pow(upper / lower, 1.0 / n) - 1.0;
}

BacktestReport run_fixed_bound_grid(const market::CandleSeries& series, double lower, double upper, int n,
                                    double principal, double fee_rate, ReplayOptions options) {
    require_series(series);
    const auto& cs = series.candles;
    auto ladder = grid::Ladder::bounded(lower, upper, n, cs.front().close.value());

    grid::GridSpec spec;
    spec.grid_size = ladder.grid_size();
    spec.n_above = ladder.gray_above();
    spec.n_below = ladder.gray_below();
    spec.fee_rate = fee_rate;
    spec.principal = principal;
    spec.validate();

    BacktestReport report;
    report.strategy = Strategy::fixed_bound;
    stamp_spec(report, spec);
    replay_traditional(report, series, spec, std::move(ladder), options);
    return report;
}

std::vector<double> default_sweep_grid_sizes() { return {0.002, 0.005, 0.01, 0.02, 0.03, 0.05}; }

std::vector<int> default_sweep_half_counts() { return {3, 5, 8, 12, 20, 30}; }

std::size_t SweepGrid::best_index() const {
    if (cells.empty()) throw std::logic_error("empty sweep");
    std::size_t best = 0;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        if (cells[i].irr > cells[best].irr) best = i;
    }
    return best;
}

grid::GridSpec sweep_cell_spec(double grid_size, int half, double principal, double fee_rate,
                               const SweepOptions& options) {
    auto spec = grid::GridSpec::symmetric(grid_size, half, principal, fee_rate);
    spec.minimum_principal = options.minimum_principal;
    spec.max_fills_per_candle = options.max_fills_per_candle;
    return spec;
}

SweepGrid run_sweep(const market::CandleSeries& series, std::span<const double> grid_sizes,
                    std::span<const int> half_counts, double principal, double fee_rate, Strategy strategy,
                    SweepOptions options) {
    if (grid_sizes.empty() || half_counts.empty()) throw std::invalid_argument("sweep lists must not be empty");
    if (strategy != Strategy::dgt && strategy != Strategy::traditional) {
        throw std::invalid_argument("sweeps run the traditional or dgt strategy");
    }
    require_series(series);

    SweepGrid out;
    out.strategy = strategy;
    out.grid_sizes.assign(grid_sizes.begin(), grid_sizes.end());
    out.half_counts.assign(half_counts.begin(), half_counts.end());
    const std::size_t total = grid_sizes.size() * half_counts.size();
    out.cells.resize(total);

    // Validate every cell up front so a bad parameter fails before any work.
    std::vector<grid::GridSpec> specs;
    specs.reserve(total);
    for (const double k : grid_sizes) {
        for (const int h : half_counts) {
            specs.push_back(sweep_cell_spec(k, h, principal, fee_rate, options));
            specs.back().validate();
        }
    }

    std::vector<std::exception_ptr> errors(total);
    auto run_cell = [&](std::size_t i) {
        try {
            out.cells[i] = run_backtest(series, specs[i], strategy, options.replay);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(total)));
    if (jobs == 1) {
        for (std::size_t i = 0; i < total; ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < total; i = next++) run_cell(i);
            });
        }
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

} // namespace gridtrade::backtest
