/*
 * gridtrade: geometric grid and dynamic-grid backtesting, C interface.
 *
 * All objects are opaque handles created by a gt_* function and released by
 * the matching gt_*_free. Every fallible call returns a gt_status; on failure
 * gt_last_error() describes the problem for the calling thread. Strings
 * returned through char** are owned by the caller and released with
 * gt_string_free.
 */
#ifndef GRIDTRADE_GRIDTRADE_H
#define GRIDTRADE_GRIDTRADE_H

#include <stddef.h>
#include <stdint.h>

#if defined _WIN32 || defined __CYGWIN__
#ifdef GRIDTRADE_BUILDING
#define GT_API __declspec(dllexport)
#else
#define GT_API __declspec(dllimport)
#endif
#else
#define GT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gt_status {
    GT_OK = 0,
    GT_E_INVALID_ARGUMENT = 1,
    GT_E_PARSE = 2,
    GT_E_DATA = 3,
    GT_E_IO = 4,
    GT_E_NETWORK = 5,
    GT_E_RANGE = 6,
    GT_E_INTERNAL = 7
} gt_status;

GT_API const char* gt_version(void);
GT_API const char* gt_last_error(void);
GT_API const char* gt_status_name(gt_status status);
GT_API void gt_string_free(char* str);

/* ---- market data ------------------------------------------------------ */

typedef struct gt_series gt_series;

typedef struct gt_candle {
    int64_t open_time;
    double open;
    double high;
    double low;
    double close;
    double volume;
    int64_t close_time;
} gt_candle;

typedef struct gt_gap {
    int64_t gap_start_ms;
    int64_t missing_bars;
} gt_gap;

typedef struct gt_walk_params {
    double start_price;
    double step_ratio;
    double p_up;
    int64_t n_steps;
    uint64_t seed;
    int64_t start_time_ms;
} gt_walk_params;

GT_API void gt_walk_params_default(gt_walk_params* params);
GT_API gt_status gt_series_synth_walk(const gt_walk_params* params, gt_series** out);
GT_API gt_status gt_series_load_csv(const char* path, const char* symbol, gt_series** out);
GT_API gt_status gt_series_store_csv(const gt_series* series, const char* path);

typedef struct gt_fetch_request {
    const char* base_url; /* NULL: $GRIDTRADE_KLINES_BASE_URL, else https://api.binance.com */
    const char* symbol;
    int64_t start_ms;     /* window is [start_ms, end_ms) by open time */
    int64_t end_ms;
    int32_t max_retries;  /* < 0 selects the default */
    int64_t initial_backoff_ms; /* < 0 selects the default */
} gt_fetch_request;

/* On GT_E_NETWORK *out may still receive the candles fetched before the
 * failure (NULL when nothing was fetched). */
GT_API gt_status gt_series_fetch(const gt_fetch_request* request, gt_series** out);
/* Union keyed by open time; candles from `newer` win on overlap. */
GT_API gt_status gt_series_merge(const gt_series* older, const gt_series* newer, gt_series** out);
GT_API size_t gt_series_size(const gt_series* series);
GT_API gt_status gt_series_candle(const gt_series* series, size_t index, gt_candle* out);
/* Writes up to `capacity` gaps; *count receives the total number found. */
GT_API gt_status gt_series_gaps(const gt_series* series, gt_gap* gaps, size_t capacity, size_t* count);
GT_API void gt_series_free(gt_series* series);

/* ---- strategies and backtests ----------------------------------------- */

typedef enum gt_strategy {
    GT_STRATEGY_TRADITIONAL = 0,
    GT_STRATEGY_DGT = 1,
    GT_STRATEGY_BUY_AND_HOLD = 2,
    GT_STRATEGY_FIXED_BOUND = 3
} gt_strategy;

typedef struct gt_grid_spec {
    double grid_size;
    int32_t n_above;
    int32_t n_below;
    double fee_rate;
    double principal;
    int32_t max_fills_per_candle; /* 0: unlimited */
    double minimum_principal;
} gt_grid_spec;

GT_API void gt_grid_spec_default(gt_grid_spec* spec);

typedef enum gt_grid_status {
    GT_GRID_ACTIVE = 0,
    GT_GRID_TERMINATED_ABOVE = 1,
    GT_GRID_TERMINATED_BELOW = 2,
    GT_GRID_RESET_ABOVE = 3,
    GT_GRID_RESET_BELOW = 4
} gt_grid_status;

typedef struct gt_report_summary {
    double irr;
    double mdd;
    double initial_equity;
    double final_equity;
    double final_wallet;
    uint64_t trade_count;
    uint64_t reset_count;
    gt_grid_status final_status;
} gt_report_summary;

typedef struct gt_report gt_report;

/* equity_stride: record every n-th candle in the curve (0: no curve). */
GT_API gt_status gt_run_backtest(const gt_series* series, const gt_grid_spec* spec, gt_strategy strategy,
                                 size_t equity_stride, gt_report** out);
GT_API gt_status gt_run_buy_and_hold(const gt_series* series, double principal, double fee_rate,
                                     size_t equity_stride, gt_report** out);
GT_API gt_status gt_run_fixed_bound_grid(const gt_series* series, double lower, double upper, int32_t n,
                                         double principal, double fee_rate, size_t equity_stride, gt_report** out);
GT_API gt_status gt_fixed_bound_grid_size(double lower, double upper, int32_t n, double* out);
GT_API gt_status gt_report_summary_get(const gt_report* report, gt_report_summary* out);
GT_API gt_status gt_report_to_json(const gt_report* report, char** out);
GT_API gt_status gt_report_to_csv(const gt_report* report, char** out);
GT_API void gt_report_free(gt_report* report);

GT_API gt_status gt_irr(double initial_equity, double final_equity, int64_t elapsed_ms, double* out);
GT_API gt_status gt_mdd(const double* equity, size_t count, double* out);

typedef struct gt_sweep gt_sweep;

typedef struct gt_sweep_request {
    const double* grid_sizes;
    size_t grid_size_count;
    const int32_t* half_counts;
    size_t half_count_count;
    double principal;
    double fee_rate;
    gt_strategy strategy; /* traditional or dgt */
    uint32_t jobs;
    double minimum_principal;
    int32_t max_fills_per_candle;
} gt_sweep_request;

GT_API void gt_sweep_request_default(gt_sweep_request* request);
GT_API gt_status gt_run_sweep(const gt_series* series, const gt_sweep_request* request, gt_sweep** out);
GT_API gt_status gt_sweep_cell(const gt_sweep* sweep, size_t size_index, size_t half_index, gt_report_summary* out);
/* Index (row-major, grid size outer) of the highest-IRR cell. */
GT_API gt_status gt_sweep_best(const gt_sweep* sweep, size_t* size_index, size_t* half_index);
GT_API gt_status gt_sweep_to_json(const gt_sweep* sweep, char** out);
GT_API gt_status gt_sweep_to_csv(const gt_sweep* sweep, char** out);
GT_API void gt_sweep_free(gt_sweep* sweep);

/* ---- expected-value theory -------------------------------------------- */

GT_API gt_status gt_profit_upper(double principal, int32_t n, double* out);
GT_API gt_status gt_loss_lower(double principal, int32_t n, double* out);
GT_API gt_status gt_linear_ev(double principal, int32_t n, double* out);
GT_API gt_status gt_required_arbitrages(int32_t n, double* out);
GT_API gt_status gt_expected_crossings(int32_t n, double* out);
GT_API gt_status gt_expected_arbitrage_value(int32_t n, double* out);
/* Writes E_0..E_{n/2} (n/2 + 1 values); *count receives that length. */
GT_API gt_status gt_solve_recurrence(int32_t n, double* values, size_t capacity, size_t* count);

typedef struct gt_walk_stats {
    double mean_steps;
    double mean_pnl;
    double std_error;
    double steps_std_error;
    double pnl_std_error;
    uint64_t trials;
    uint64_t seed;
} gt_walk_stats;

typedef struct gt_theory_params {
    int32_t n;
    double principal;
    double step_ratio;
    double fee_rate;
} gt_theory_params;

GT_API void gt_theory_params_default(gt_theory_params* params);
GT_API gt_status gt_mc_first_passage(int32_t n, uint64_t trials, uint64_t seed, uint32_t jobs, gt_walk_stats* out);
GT_API gt_status gt_mc_grid_ev(const gt_theory_params* params, uint64_t trials, uint64_t seed, uint32_t jobs,
                               gt_walk_stats* out);
GT_API gt_status gt_mc_engine_ev(const gt_grid_spec* spec, double start_price, uint64_t trials, uint64_t seed,
                                 uint32_t jobs, gt_walk_stats* out);
GT_API gt_status gt_walk_stats_to_json(const gt_walk_stats* stats, char** out);

#ifdef __cplusplus
}
#endif

#endif /* GRIDTRADE_GRIDTRADE_H */
