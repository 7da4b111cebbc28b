#include "gridtrade/gridtrade.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "analytics.hpp"
#include "backtest.hpp"
#include "errors.hpp"
#include "klines_client.hpp"
#include "market_data.hpp"
#include "report_io.hpp"

struct gt_series {
    std::shared_ptr<const gridtrade::market::CandleSeries> data;
};

struct gt_report {
    gridtrade::backtest::BacktestReport data;
};

struct gt_sweep {
    gridtrade::backtest::SweepGrid data;
};

namespace {

using namespace gridtrade;

thread_local std::string g_last_error;

gt_status fail(gt_status status, const char* message) {
    g_last_error = message;
    return status;
}

template <class Fn>
gt_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        g_last_error.clear();
        return GT_OK;
    } catch (const std::invalid_argument& e) {
        return fail(GT_E_INVALID_ARGUMENT, e.what());
    } catch (const ParseError& e) {
        return fail(GT_E_PARSE, e.what());
    } catch (const DataError& e) {
        return fail(GT_E_DATA, e.what());
    } catch (const IoError& e) {
        return fail(GT_E_IO, e.what());
    } catch (const NetworkError& e) {
        return fail(GT_E_NETWORK, e.what());
    } catch (const RangeError& e) {
        return fail(GT_E_RANGE, e.what());
    } catch (const std::bad_alloc&) {
        return fail(GT_E_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(GT_E_INTERNAL, e.what());
    } catch (...) {
        return fail(GT_E_INTERNAL, "unknown error");
    }
}

void require(const void* p, const char* name) {
    if (p == nullptr) throw std::invalid_argument(std::string(name) + " must not be NULL");
}

char* duplicate(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

gt_series* wrap(market::CandleSeries series) {
    return new gt_series{std::make_shared<const market::CandleSeries>(std::move(series))};
}

grid::GridSpec to_spec(const gt_grid_spec& s) {
    grid::GridSpec spec;
    spec.grid_size = s.grid_size;
    spec.n_above = s.n_above;
    spec.n_below = s.n_below;
    spec.fee_rate = s.fee_rate;
    spec.principal = s.principal;
    spec.max_fills_per_candle = s.max_fills_per_candle;
    spec.minimum_principal = s.minimum_principal;
    return spec;
}

backtest::ReplayOptions replay(std::size_t stride) {
    backtest::ReplayOptions o;
    o.equity_stride = stride;
    o.keep_fills = true;
    return o;
}

gt_grid_status to_c(grid::Status s) {
    switch (s) {
        case grid::Status::active: return GT_GRID_ACTIVE;
        case grid::Status::terminated_above: return GT_GRID_TERMINATED_ABOVE;
        case grid::Status::terminated_below: return GT_GRID_TERMINATED_BELOW;
        case grid::Status::reset_above: return GT_GRID_RESET_ABOVE;
        case grid::Status::reset_below: return GT_GRID_RESET_BELOW;
    }
    return GT_GRID_ACTIVE;
}

void summarize(const backtest::BacktestReport& r, gt_report_summary* out) {
    out->irr = r.irr;
    out->mdd = r.mdd;
    out->initial_equity = r.initial_equity;
    out->final_equity = r.final_equity;
    out->final_wallet = r.final_wallet;
    out->trade_count = r.trade_count;
    out->reset_count = r.reset_count;
    out->final_status = to_c(r.final_status);
}

backtest::Strategy to_strategy(gt_strategy s) {
    switch (s) {
        case GT_STRATEGY_TRADITIONAL: return backtest::Strategy::traditional;
        case GT_STRATEGY_DGT: return backtest::Strategy::dgt;
        case GT_STRATEGY_BUY_AND_HOLD: return backtest::Strategy::buy_and_hold;
        case GT_STRATEGY_FIXED_BOUND: return backtest::Strategy::fixed_bound;
    }
    throw std::invalid_argument("unknown strategy");
}

void write_stats(const analytics::WalkStats& s, gt_walk_stats* out) {
    out->mean_steps = s.mean_steps;
    out->mean_pnl = s.mean_pnl;
    out->std_error = s.std_error;
    out->steps_std_error = s.steps_std_error;
    out->pnl_std_error = s.pnl_std_error;
    out->trials = s.trials;
    out->seed = s.seed;
}

template <class Fn>
gt_status scalar(double* out, Fn&& fn) noexcept {
    return guarded([&] {
        require(out, "out");
        *out = fn();
    });
}

} // namespace

extern "C" {

const char* gt_version(void) { return "1.0.0"; }

const char* gt_last_error(void) { return g_last_error.c_str(); }

const char* gt_status_name(gt_status status) {
    switch (status) {
        case GT_OK: return "ok";
        case GT_E_INVALID_ARGUMENT: return "invalid argument";
        case GT_E_PARSE: return "parse error";
        case GT_E_DATA: return "data error";
        case GT_E_IO: return "i/o error";
        case GT_E_NETWORK: return "network error";
        case GT_E_RANGE: return "range error";
        case GT_E_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void gt_string_free(char* str) { std::free(str); }

void gt_walk_params_default(gt_walk_params* params) {
    if (params == nullptr) return;
    const market::WalkParams d;
    *params = {d.start_price, d.step_ratio, d.p_up, d.n_steps, d.seed, d.start_time_ms};
}

gt_status gt_series_synth_walk(const gt_walk_params* params, gt_series** out) {
    return guarded([&] {
        require(params, "params");
        require(out, "out");
        market::WalkParams p;
        p.start_price = params->start_price;
        p.step_ratio = params->step_ratio;
        p.p_up = params->p_up;
        p.n_steps = params->n_steps;
        p.seed = params->seed;
        p.start_time_ms = params->start_time_ms;
        *out = wrap(market::synth_random_walk(p));
    });
}

gt_status gt_series_load_csv(const char* path, const char* symbol, gt_series** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = wrap(market::load_cache(path, symbol != nullptr ? symbol : ""));
    });
}

gt_status gt_series_store_csv(const gt_series* series, const char* path) {
    return guarded([&] {
        require(series, "series");
        require(path, "path");
        market::store_cache(*series->data, path);
    });
}

gt_status gt_series_fetch(const gt_fetch_request* request, gt_series** out) {
    return guarded([&] {
        require(request, "request");
        require(request->symbol, "request->symbol");
        require(out, "out");
        *out = nullptr;
        const std::string base = request->base_url != nullptr ? request->base_url : market::default_base_url();
        market::FetchOptions options;
        if (request->max_retries >= 0) options.max_retries = request->max_retries;
        if (request->initial_backoff_ms >= 0) {
            options.initial_backoff = std::chrono::milliseconds(request->initial_backoff_ms);
        }
        market::KlinesClient client(market::make_http_transport(base), options);
        market::FetchRequest req;
        req.symbol = request->symbol;
        req.start_ms = request->start_ms;
        req.end_ms = request->end_ms;
        try {
            *out = wrap(client.fetch(req));
        } catch (const market::FetchError& e) {
            if (!e.partial().empty()) *out = wrap(e.partial());
            throw;
        }
    });
}

gt_status gt_series_merge(const gt_series* older, const gt_series* newer, gt_series** out) {
    return guarded([&] {
        require(older, "older");
        require(newer, "newer");
        require(out, "out");
        *out = wrap(market::merge_series(*older->data, *newer->data));
    });
}

size_t gt_series_size(const gt_series* series) { return series != nullptr ? series->data->size() : 0; }

gt_status gt_series_candle(const gt_series* series, size_t index, gt_candle* out) {
    return guarded([&] {
        require(series, "series");
        require(out, "out");
        if (index >= series->data->size()) throw std::invalid_argument("candle index out of range");
        const auto& c = series->data->candles[index];
        *out = {c.open_time, c.open.value(), c.high.value(), c.low.value(), c.close.value(), c.volume.value(),
                c.close_time};
    });
}

gt_status gt_series_gaps(const gt_series* series, gt_gap* gaps, size_t capacity, size_t* count) {
    return guarded([&] {
        require(series, "series");
        require(count, "count");
        const auto report = market::validate_series(*series->data);
        *count = report.size();
        if (capacity > 0) require(gaps, "gaps");
        for (std::size_t i = 0; i < report.size() && i < capacity; ++i) {
            gaps[i] = {report[i].gap_start_ms, report[i].missing_bars};
        }
    });
}

void gt_series_free(gt_series* series) { delete series; }

void gt_grid_spec_default(gt_grid_spec* spec) {
    if (spec == nullptr) return;
    const grid::GridSpec d;
    *spec = {d.grid_size, d.n_above, d.n_below, d.fee_rate, d.principal, d.max_fills_per_candle,
             d.minimum_principal};
}

gt_status gt_run_backtest(const gt_series* series, const gt_grid_spec* spec, gt_strategy strategy,
                          size_t equity_stride, gt_report** out) {
    return guarded([&] {
        require(series, "series");
        require(spec, "spec");
        require(out, "out");
        auto report = backtest::run_backtest(*series->data, to_spec(*spec), to_strategy(strategy), replay(equity_stride));
        *out = new gt_report{std::move(report)};
    });
}

gt_status gt_run_buy_and_hold(const gt_series* series, double principal, double fee_rate, size_t equity_stride,
                              gt_report** out) {
    return guarded([&] {
        require(series, "series");
        require(out, "out");
        *out = new gt_report{backtest::run_buy_and_hold(*series->data, principal, fee_rate, replay(equity_stride))};
    });
}

gt_status gt_run_fixed_bound_grid(const gt_series* series, double lower, double upper, int32_t n, double principal,
                                  double fee_rate, size_t equity_stride, gt_report** out) {
    return guarded([&] {
        require(series, "series");
        require(out, "out");
        *out = new gt_report{backtest::run_fixed_bound_grid(*series->data, lower, upper, n, principal, fee_rate,
                                                            replay(equity_stride))};
    });
}

gt_status gt_fixed_bound_grid_size(double lower, double upper, int32_t n, double* out) {
    return scalar(out, [&] { return backtest::fixed_bound_grid_size(lower, upper, n); });
}

gt_status gt_report_summary_get(const gt_report* report, gt_report_summary* out) {
    return guarded([&] {
        require(report, "report");
        require(out, "out");
        summarize(report->data, out);
    });
}

gt_status gt_report_to_json(const gt_report* report, char** out) {
    return guarded([&] {
        require(report, "report");
        require(out, "out");
        *out = duplicate(io::to_json(report->data).dump(2));
    });
}

gt_status gt_report_to_csv(const gt_report* report, char** out) {
    return guarded([&] {
        require(report, "report");
        require(out, "out");
        *out = duplicate(io::report_csv(report->data));
    });
}

void gt_report_free(gt_report* report) { delete report; }

gt_status gt_irr(double initial_equity, double final_equity, int64_t elapsed_ms, double* out) {
    return scalar(out, [&] { return backtest::irr(initial_equity, final_equity, elapsed_ms); });
}

gt_status gt_mdd(const double* equity, size_t count, double* out) {
    return scalar(out, [&] {
        if (count > 0) require(equity, "equity");
        return backtest::mdd(std::span<const double>(equity, count));
    });
}

void gt_sweep_request_default(gt_sweep_request* request) {
    if (request == nullptr) return;
    const backtest::SweepOptions d;
    *request = {};
    request->principal = 1000.0;
    request->fee_rate = 0.0008;
    request->strategy = GT_STRATEGY_DGT;
    request->jobs = d.jobs;
    request->minimum_principal = d.minimum_principal;
    request->max_fills_per_candle = d.max_fills_per_candle;
}

gt_status gt_run_sweep(const gt_series* series, const gt_sweep_request* request, gt_sweep** out) {
    return guarded([&] {
        require(series, "series");
        require(request, "request");
        require(out, "out");
        if (request->grid_size_count > 0) require(request->grid_sizes, "grid_sizes");
        if (request->half_count_count > 0) require(request->half_counts, "half_counts");
        backtest::SweepOptions options;
        options.jobs = request->jobs;
        options.minimum_principal = request->minimum_principal;
        options.max_fills_per_candle = request->max_fills_per_candle;
        std::vector<int> halves(request->half_counts, request->half_counts + request->half_count_count);
        auto grid = backtest::run_sweep(*series->data,
                                        std::span<const double>(request->grid_sizes, request->grid_size_count),
                                        halves, request->principal, request->fee_rate,
                                        to_strategy(request->strategy), options);
        *out = new gt_sweep{std::move(grid)};
    });
}

gt_status gt_sweep_cell(const gt_sweep* sweep, size_t size_index, size_t half_index, gt_report_summary* out) {
    return guarded([&] {
        require(sweep, "sweep");
        require(out, "out");
        if (size_index >= sweep->data.grid_sizes.size() || half_index >= sweep->data.half_counts.size()) {
            throw std::invalid_argument("sweep cell index out of range");
        }
        summarize(sweep->data.at(size_index, half_index), out);
    });
}

gt_status gt_sweep_best(const gt_sweep* sweep, size_t* size_index, size_t* half_index) {
    return guarded([&] {
        require(sweep, "sweep");
        require(size_index, "size_index");
        require(half_index, "half_index");
        const auto best = sweep->data.best_index();
        *size_index = best / sweep->data.half_counts.size();
        *half_index = best % sweep->data.half_counts.size();
    });
}

gt_status gt_sweep_to_json(const gt_sweep* sweep, char** out) {
    return guarded([&] {
        require(sweep, "sweep");
        require(out, "out");
        *out = duplicate(io::to_json(sweep->data).dump(2));
    });
}

gt_status gt_sweep_to_csv(const gt_sweep* sweep, char** out) {
    return guarded([&] {
        require(sweep, "sweep");
        require(out, "out");
        *out = duplicate(io::sweep_csv(sweep->data));
    });
}

void gt_sweep_free(gt_sweep* sweep) { delete sweep; }

gt_status gt_profit_upper(double principal, int32_t n, double* out) {
    return scalar(out, [&] { return analytics::profit_upper(principal, n); });
}

gt_status gt_loss_lower(double principal, int32_t n, double* out) {
    return scalar(out, [&] { return analytics::loss_lower(principal, n); });
}

gt_status gt_linear_ev(double principal, int32_t n, double* out) {
    return scalar(out, [&] { return analytics::linear_ev(principal, n); });
}

gt_status gt_required_arbitrages(int32_t n, double* out) {
    return scalar(out, [&] { return analytics::required_arbitrages(n); });
}

gt_status gt_expected_crossings(int32_t n, double* out) {
    return scalar(out, [&] { return analytics::expected_crossings(n); });
}

gt_status gt_expected_arbitrage_value(int32_t n, double* out) {
    return scalar(out, [&] { return analytics::expected_arbitrage_value(n); });
}

gt_status gt_solve_recurrence(int32_t n, double* values, size_t capacity, size_t* count) {
    return guarded([&] {
        require(count, "count");
        const auto e = analytics::solve_recurrence(n);
        *count = e.size();
        if (capacity > 0) require(values, "values");
        for (std::size_t i = 0; i < e.size() && i < capacity; ++i) values[i] = e[i];
    });
}

void gt_theory_params_default(gt_theory_params* params) {
    if (params == nullptr) return;
    const analytics::TheoryParams d;
    *params = {d.n, d.principal, d.step_ratio, d.fee_rate};
}

gt_status gt_mc_first_passage(int32_t n, uint64_t trials, uint64_t seed, uint32_t jobs, gt_walk_stats* out) {
    return guarded([&] {
        require(out, "out");
        write_stats(analytics::mc_first_passage(n, trials, seed, {jobs}), out);
    });
}

gt_status gt_mc_grid_ev(const gt_theory_params* params, uint64_t trials, uint64_t seed, uint32_t jobs,
                        gt_walk_stats* out) {
    return guarded([&] {
        require(params, "params");
        require(out, "out");
        analytics::TheoryParams p;
        p.n = params->n;
        p.principal = params->principal;
        p.step_ratio = params->step_ratio;
        p.fee_rate = params->fee_rate;
        write_stats(analytics::mc_grid_ev(p, trials, seed, {jobs}), out);
    });
}

gt_status gt_mc_engine_ev(const gt_grid_spec* spec, double start_price, uint64_t trials, uint64_t seed,
                          uint32_t jobs, gt_walk_stats* out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        write_stats(analytics::mc_engine_ev(to_spec(*spec), start_price, trials, seed, {jobs}), out);
    });
}

gt_status gt_walk_stats_to_json(const gt_walk_stats* stats, char** out) {
    return guarded([&] {
        require(stats, "stats");
        require(out, "out");
        analytics::WalkStats s;
        s.mean_steps = stats->mean_steps;
        s.mean_pnl = stats->mean_pnl;
        s.std_error = stats->std_error;
        s.steps_std_error = stats->steps_std_error;
        s.pnl_std_error = stats->pnl_std_error;
        s.trials = stats->trials;
        s.seed = stats->seed;
        *out = duplicate(io::to_json(s).dump(2));
    });
}

} // extern "C"
