// gridtrade command-line front end. Talks to the library only through the C API.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "gridtrade/gridtrade.h"
#include "json.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr std::uint64_t kMinVerifyTrials = 1000;

// Runtime/data failure carrying the exit status to return.
struct CommandError : std::runtime_error {
    explicit CommandError(const std::string& what, int code = kExitRuntime) : std::runtime_error(what), code(code) {}
    int code;
};

struct UsageError : CommandError {
    explicit UsageError(const std::string& what) : CommandError(what, kExitUsage) {}
};

void check(gt_status status, const std::string& context) {
    if (status == GT_OK) return;
    const int code = status == GT_E_INVALID_ARGUMENT ? kExitUsage : kExitRuntime;
    throw CommandError(context + ": " + gt_status_name(status) + ": " + gt_last_error(), code);
}

struct SeriesDeleter {
    void operator()(gt_series* s) const { gt_series_free(s); }
};
struct ReportDeleter {
    void operator()(gt_report* r) const { gt_report_free(r); }
};
struct SweepDeleter {
    void operator()(gt_sweep* s) const { gt_sweep_free(s); }
};
using SeriesPtr = std::unique_ptr<gt_series, SeriesDeleter>;
using ReportPtr = std::unique_ptr<gt_report, ReportDeleter>;
using SweepPtr = std::unique_ptr<gt_sweep, SweepDeleter>;

std::string take_string(char* s) {
    std::string out = s != nullptr ? s : "";
    gt_string_free(s);
    return out;
}

// ---- dates ----------------------------------------------------------------

// Accepts YYYY-MM-DD and YYYY-MM-DDTHH:MM[:SS][Z], always UTC.
std::int64_t parse_iso8601_ms(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char tail[8] = {};
    int fields = std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%7s", &y, &mo, &d, &h, &mi, &s, tail);
    const bool date_only = fields == 3 && text.size() == 10;
    const bool valid_tail = fields < 7 || std::string(tail) == "Z";
    if (!(date_only || fields >= 5) || !valid_tail) throw UsageError("invalid ISO-8601 date '" + text + "'");
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) throw UsageError("invalid ISO-8601 date '" + text + "'");
    const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
    return duration_cast<milliseconds>(tp.time_since_epoch()).count();
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---- shared option groups --------------------------------------------------

struct SourceOptions {
    std::string cache;
    std::string symbol = "BTCUSDT";
    bool synthetic = false;
    std::uint64_t seed = 1;
    std::int64_t steps = 100'000;
    double start_price = 100.0;
    double walk_k = 0.001;
    double p_up = 0.5;

    void add(CLI::App& app) {
        app.add_option("--cache", cache, "Candle cache CSV to replay");
        app.add_option("--symbol", symbol, "Symbol recorded for cached data")->capture_default_str();
        app.add_flag("--synthetic", synthetic, "Replay a seeded synthetic random walk instead of a cache");
        app.add_option("--seed", seed, "Synthetic walk seed")->capture_default_str();
        app.add_option("--steps", steps, "Synthetic walk length in 1-minute candles")->capture_default_str();
        app.add_option("--start-price", start_price, "Synthetic walk start price")->capture_default_str();
        app.add_option("--walk-k", walk_k, "Synthetic walk step ratio")->capture_default_str();
        app.add_option("--p-up", p_up, "Synthetic walk up-step probability")->capture_default_str();
    }

    json to_json() const {
        if (synthetic) {
            return {{"type", "synthetic"}, {"seed", seed}, {"steps", steps}, {"start_price", start_price},
                    {"walk_k", walk_k}, {"p_up", p_up}};
        }
        return {{"type", "cache"}, {"cache", fs::path(cache).filename().string()}, {"symbol", symbol}};
    }

    SeriesPtr load() const {
        if (synthetic == !cache.empty()) throw UsageError("choose exactly one of --cache or --synthetic");
        gt_series* raw = nullptr;
        if (synthetic) {
            gt_walk_params p;
            gt_walk_params_default(&p);
            p.seed = seed;
            p.n_steps = steps;
            p.start_price = start_price;
            p.step_ratio = walk_k;
            p.p_up = p_up;
            check(gt_series_synth_walk(&p, &raw), "synthetic walk");
        } else {
            if (!fs::exists(cache)) throw CommandError("data file not found: " + cache);
            check(gt_series_load_csv(cache.c_str(), symbol.c_str(), &raw), "loading " + cache);
        }
        SeriesPtr series(raw);
        if (gt_series_size(series.get()) == 0) throw CommandError("series is empty");
        return series;
    }
};

struct OutputOptions {
    std::string out;
    std::string format = "json";

    void add(CLI::App& app) {
        app.add_option("--out", out, "Write the report to this file");
        app.add_option("--format", format, "Report format")
            ->check(CLI::IsMember({"json", "csv"}))
            ->capture_default_str();
    }
};

// Writes the body, then a sidecar with paths and wall-clock time that must
// stay out of the reproducible body.
void write_output(const OutputOptions& o, const std::string& body, const json& config, const std::string& command) {
    if (o.out.empty()) return;
    {
        std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
        if (!f) throw CommandError("cannot write " + o.out);
        f << body;
        if (!f) throw CommandError("failed writing " + o.out);
    }
    json meta = {{"command", command},
                 {"generated_at", utc_now()},
                 {"output", fs::absolute(o.out).string()},
                 {"library_version", gt_version()},
                 {"config", config}};
    std::ofstream m(o.out + ".meta.json", std::ios::binary | std::ios::trunc);
    m << meta.dump(2) << '\n';
    std::cout << "wrote " << o.out << '\n';
}

json parse_json(char* raw) { return json::parse(take_string(raw)); }

std::string sidecar_inputs_note(const SourceOptions& src) {
    return src.synthetic ? std::string("synthetic") : fs::absolute(src.cache).string();
}

// ---- fetch -----------------------------------------------------------------

struct FetchCmd {
    std::string symbol = "BTCUSDT";
    std::string start;
    std::string end;
    std::string cache;
    std::string base_url;
    int max_retries = 5;

    int run() const {
        const auto start_ms = parse_iso8601_ms(start);
        const auto end_ms = parse_iso8601_ms(end);
        if (end_ms <= start_ms) throw UsageError("--end must be after --start");

        SeriesPtr existing;
        if (fs::exists(cache)) {
            gt_series* raw = nullptr;
            check(gt_series_load_csv(cache.c_str(), symbol.c_str(), &raw), "loading existing cache " + cache);
            existing.reset(raw);
        }

        gt_fetch_request req{};
        req.base_url = base_url.empty() ? nullptr : base_url.c_str();
        req.symbol = symbol.c_str();
        req.start_ms = start_ms;
        req.end_ms = end_ms;
        req.max_retries = max_retries;
        req.initial_backoff_ms = -1;
        gt_series* fetched_raw = nullptr;
        const gt_status status = gt_series_fetch(&req, &fetched_raw);
        const std::string fetch_error = status == GT_OK ? "" : gt_last_error();
        SeriesPtr fetched(fetched_raw);

        SeriesPtr merged;
        if (fetched) {
            if (existing) {
                gt_series* raw = nullptr;
                check(gt_series_merge(existing.get(), fetched.get(), &raw), "merging cache");
                merged.reset(raw);
            } else {
                merged = std::move(fetched);
            }
            check(gt_series_store_csv(merged.get(), cache.c_str()), "writing cache " + cache);
        }
        if (status != GT_OK) {
            const int code = status == GT_E_INVALID_ARGUMENT ? kExitUsage : kExitRuntime;
            if (merged) std::cerr << "partial progress saved to " << cache << '\n';
            throw CommandError(std::string("fetch failed: ") + gt_status_name(status) + ": " + fetch_error, code);
        }

        const gt_series* view = merged ? merged.get() : existing.get();
        const std::size_t total = view != nullptr ? gt_series_size(view) : 0;
        if (merged == nullptr && existing == nullptr) {
            std::ofstream(cache, std::ios::binary) << "open_time,open,high,low,close,volume,close_time\n";
        }
        std::size_t in_window = 0;
        for (std::size_t i = 0; i < total; ++i) {
            gt_candle c;
            check(gt_series_candle(view, i, &c), "reading cache");
            if (c.open_time >= start_ms && c.open_time < end_ms) ++in_window;
        }
        std::cout << fmt::format("{}: {} candles in window, {} in cache {}\n", symbol, in_window, total, cache);

        if (view != nullptr) {
            std::size_t count = 0;
            check(gt_series_gaps(view, nullptr, 0, &count), "gap scan");
            std::vector<gt_gap> gaps(count);
            check(gt_series_gaps(view, gaps.data(), gaps.size(), &count), "gap scan");
            std::cout << fmt::format("gaps: {}\n", count);
            for (const auto& g : gaps) {
                std::cout << fmt::format("  from {} missing {} bars\n", g.gap_start_ms, g.missing_bars);
            }
        }
        return kExitOk;
    }
};

// ---- backtest ----------------------------------------------------------------

struct GridOptions {
    double k = 0.01;
    int half = 8;
    int n_above = 0;
    int n_below = 0;
    double fee = 0.0008;
    double principal = 1000.0;
    int max_fills = 0;
    double min_principal = 10.0;

    void add(CLI::App& app) {
        app.add_option("--k", k, "Grid size (ratio between adjacent levels minus one)")->capture_default_str();
        app.add_option("--half", half, "Grid numbers half: levels above and below the centre")->capture_default_str();
        app.add_option("--n-above", n_above, "Traditional grid: levels above (default --half)");
        app.add_option("--n-below", n_below, "Traditional grid: levels below (default --half)");
        app.add_option("--fee", fee, "Proportional fee per fill")->capture_default_str();
        app.add_option("--principal", principal, "Initial capital in quote currency")->capture_default_str();
        app.add_option("--max-fills-per-candle", max_fills, "Cap on fills per candle (0 = unlimited)")
            ->capture_default_str();
        app.add_option("--min-principal", min_principal, "DGT: dormant below this principal after a downward reset")
            ->capture_default_str();
    }

    gt_grid_spec spec() const {
        gt_grid_spec s;
        gt_grid_spec_default(&s);
        s.grid_size = k;
        s.n_above = n_above > 0 ? n_above : half;
        s.n_below = n_below > 0 ? n_below : half;
        s.fee_rate = fee;
        s.principal = principal;
        s.max_fills_per_candle = max_fills;
        s.minimum_principal = min_principal;
        return s;
    }

    json to_json() const {
        const auto s = spec();
        return {{"k", s.grid_size}, {"n_above", s.n_above}, {"n_below", s.n_below}, {"fee", s.fee_rate},
                {"principal", s.principal}, {"max_fills_per_candle", s.max_fills_per_candle},
                {"min_principal", s.minimum_principal}};
    }
};

struct BoundOptions {
    std::optional<double> lower;
    std::optional<double> upper;
    int grids = 20;

    void add(CLI::App& app) {
        app.add_option("--lower", lower, "Fixed-bound grid bottom level (default: 0.9 x series low)");
        app.add_option("--upper", upper, "Fixed-bound grid top level (default: 1.1 x series high)");
        app.add_option("--grids", grids, "Fixed-bound grid count")->capture_default_str();
    }

    // Resolves defaults from the series when bounds are not given.
    std::pair<double, double> resolve(const gt_series* series) const {
        double lo = 0.0, hi = 0.0;
        const std::size_t n = gt_series_size(series);
        for (std::size_t i = 0; i < n; ++i) {
            gt_candle c;
            check(gt_series_candle(series, i, &c), "reading series");
            lo = i == 0 ? c.low : std::min(lo, c.low);
            hi = i == 0 ? c.high : std::max(hi, c.high);
        }
        return {lower.value_or(lo * 0.9), upper.value_or(hi * 1.1)};
    }
};

const char* status_name(gt_grid_status s) {
    switch (s) {
        case GT_GRID_ACTIVE: return "active";
        case GT_GRID_TERMINATED_ABOVE: return "terminated_above";
        case GT_GRID_TERMINATED_BELOW: return "terminated_below";
        case GT_GRID_RESET_ABOVE: return "reset_above";
        case GT_GRID_RESET_BELOW: return "reset_below";
    }
    return "?";
}

struct BacktestCmd {
    SourceOptions source;
    GridOptions grid;
    BoundOptions bounds;
    OutputOptions output;
    std::string strategy = "dgt";
    std::size_t stride = 1;

    int run() const {
        auto series = source.load();
        json config = {{"command", "backtest"}, {"strategy", strategy}, {"source", source.to_json()},
                       {"equity_stride", stride}};
        gt_report* raw = nullptr;
        if (strategy == "dgt" || strategy == "traditional") {
            const auto spec = grid.spec();
            config["grid"] = grid.to_json();
            check(gt_run_backtest(series.get(), &spec,
                                  strategy == "dgt" ? GT_STRATEGY_DGT : GT_STRATEGY_TRADITIONAL, stride, &raw),
                  "backtest");
        } else if (strategy == "buyhold") {
            config["principal"] = grid.principal;
            config["fee"] = grid.fee;
            check(gt_run_buy_and_hold(series.get(), grid.principal, grid.fee, stride, &raw), "buy-and-hold");
        } else {
            const auto [lo, hi] = bounds.resolve(series.get());
            config["lower"] = lo;
            config["upper"] = hi;
            config["grids"] = bounds.grids;
            config["principal"] = grid.principal;
            config["fee"] = grid.fee;
            check(gt_run_fixed_bound_grid(series.get(), lo, hi, bounds.grids, grid.principal, grid.fee, stride, &raw),
                  "fixed-bound grid");
        }
        ReportPtr report(raw);

        gt_report_summary s;
        check(gt_report_summary_get(report.get(), &s), "summary");
        std::cout << "config: " << config.dump() << '\n';
        std::cout << fmt::format("strategy {}  IRR {:.6f}  MDD {:.6f}  trades {}  resets {}  final equity {:.6f}  "
                                 "status {}\n",
                                 strategy, s.irr, s.mdd, s.trade_count, s.reset_count, s.final_equity,
                                 status_name(s.final_status));

        std::string body;
        if (output.format == "json") {
            char* text = nullptr;
            check(gt_report_to_json(report.get(), &text), "serializing report");
            body = json{{"config", config}, {"report", parse_json(text)}}.dump(2) + "\n";
        } else {
            char* text = nullptr;
            check(gt_report_to_csv(report.get(), &text), "serializing report");
            body = take_string(text);
        }
        json meta_config = config;
        meta_config["input"] = sidecar_inputs_note(source);
        write_output(output, body, meta_config, "backtest");
        return kExitOk;
    }
};

// ---- sweep --------------------------------------------------------------------

struct SweepCmd {
    SourceOptions source;
    GridOptions grid;
    OutputOptions output;
    std::string strategy = "dgt";
    std::vector<double> k_list{0.002, 0.005, 0.01, 0.02, 0.03, 0.05};
    std::vector<int> half_list{3, 5, 8, 12, 20, 30};
    unsigned jobs = 1;

    int run() const {
        auto series = source.load();
        gt_sweep_request req;
        gt_sweep_request_default(&req);
        req.grid_sizes = k_list.data();
        req.grid_size_count = k_list.size();
        std::vector<int32_t> halves(half_list.begin(), half_list.end());
        req.half_counts = halves.data();
        req.half_count_count = halves.size();
        req.principal = grid.principal;
        req.fee_rate = grid.fee;
        req.strategy = strategy == "dgt" ? GT_STRATEGY_DGT : GT_STRATEGY_TRADITIONAL;
        req.jobs = jobs;
        req.minimum_principal = grid.min_principal;
        req.max_fills_per_candle = grid.max_fills;

        gt_sweep* raw = nullptr;
        check(gt_run_sweep(series.get(), &req, &raw), "sweep");
        SweepPtr sweep(raw);

        json config = {{"command", "sweep"},   {"strategy", strategy},         {"source", source.to_json()},
                       {"k_list", k_list},     {"half_list", half_list},       {"fee", grid.fee},
                       {"principal", grid.principal}, {"min_principal", grid.min_principal},
                       {"max_fills_per_candle", grid.max_fills}};
        std::cout << "config: " << config.dump() << '\n';

        std::cout << fmt::format("{:>8}", "k \\ half");
        for (int h : half_list) std::cout << fmt::format(" {:>10}", h);
        std::cout << '\n';
        for (std::size_t ki = 0; ki < k_list.size(); ++ki) {
            std::cout << fmt::format("{:>8}", k_list[ki]);
            for (std::size_t hi = 0; hi < half_list.size(); ++hi) {
                gt_report_summary s;
                check(gt_sweep_cell(sweep.get(), ki, hi, &s), "sweep cell");
                std::cout << fmt::format(" {:>10.4f}", s.irr);
            }
            std::cout << '\n';
        }
        std::size_t bk = 0, bh = 0;
        check(gt_sweep_best(sweep.get(), &bk, &bh), "best cell");
        gt_report_summary best;
        check(gt_sweep_cell(sweep.get(), bk, bh, &best), "best cell");
        std::cout << fmt::format("best cell: k={} half={} IRR {:.6f} MDD {:.6f} trades {} resets {}\n", k_list[bk],
                                 half_list[bh], best.irr, best.mdd, best.trade_count, best.reset_count);

        char* text = nullptr;
        std::string body;
        if (output.format == "json") {
            check(gt_sweep_to_json(sweep.get(), &text), "serializing sweep");
            body = json{{"config", config}, {"sweep", parse_json(text)}}.dump(2) + "\n";
        } else {
            check(gt_sweep_to_csv(sweep.get(), &text), "serializing sweep");
            body = take_string(text);
        }
        json meta_config = config;
        meta_config["input"] = sidecar_inputs_note(source);
        meta_config["jobs"] = jobs;
        write_output(output, body, meta_config, "sweep");
        return kExitOk;
    }
};

// ---- verify-ev ---------------------------------------------------------------

struct VerifyCmd {
    std::vector<int> n_list{2, 4, 6, 8};
    std::uint64_t trials = 100'000;
    std::uint64_t seed = 20240817;
    double principal = 600.0;
    double k = 0.01;
    double fee = 0.0008;
    unsigned jobs = 1;
    std::string out;

    int run() const {
        json rows = json::array();
        bool all_pass = true;
        const bool enough = trials >= kMinVerifyTrials;
        std::cout << fmt::format("{:>4} {:>10} {:>10} {:>10} {:>8} {:>6} {:>10} {:>8} {:>12} {:>10} {:>12}  {}\n", "n",
                                 "P_u", "L_l", "E(G)", "req_arb", "E_0", "mc_steps", "se", "mc_pnl(f=0)", "se",
                                 "mc_pnl(fee)", "result");
        for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
            const int n = n_list[idx];
            double pu = 0, ll = 0, eg = 0, req = 0, e0 = 0, arb = 0;
            check(gt_profit_upper(principal, n, &pu), "profit_upper");
            check(gt_loss_lower(principal, n, &ll), "loss_lower");
            check(gt_linear_ev(principal, n, &eg), "linear_ev");
            check(gt_required_arbitrages(n, &req), "required_arbitrages");
            check(gt_expected_crossings(n, &e0), "expected_crossings");
            check(gt_expected_arbitrage_value(n, &arb), "expected_arbitrage_value");

            const std::uint64_t row_seed = seed + idx;
            gt_walk_stats passage;
            check(gt_mc_first_passage(n, trials, row_seed, jobs, &passage), "mc_first_passage");
            gt_theory_params tp;
            gt_theory_params_default(&tp);
            tp.n = n;
            tp.principal = principal;
            tp.step_ratio = k;
            tp.fee_rate = 0.0;
            gt_walk_stats ev0;
            check(gt_mc_grid_ev(&tp, trials, row_seed, jobs, &ev0), "mc_grid_ev");
            tp.fee_rate = fee;
            gt_walk_stats evf;
            check(gt_mc_grid_ev(&tp, trials, row_seed, jobs, &evf), "mc_grid_ev");

            const bool passage_ok = std::abs(passage.mean_steps - e0) <= 3.0 * passage.std_error;
            const bool zero_ev_ok = std::abs(ev0.mean_pnl) <= 3.0 * ev0.std_error;
            const bool fee_ok = fee > 0.0 ? evf.mean_pnl < 0.0 : true;
            const bool identity_ok = arb == req;
            const bool pass = enough && passage_ok && zero_ev_ok && fee_ok && identity_ok;
            all_pass = all_pass && pass;

            std::string note;
            if (!enough) note = fmt::format(" (insufficient trials: need >= {})", kMinVerifyTrials);
            else if (!pass) note = " (outside 3 standard errors)";
            std::cout << fmt::format("{:>4} {:>10.4f} {:>10.4f} {:>10.4f} {:>8} {:>6} {:>10.4f} {:>8.4f} {:>12.4f} "
                                     "{:>10.4f} {:>12.4f}  {}{}\n",
                                     n, pu, ll, eg, req, e0, passage.mean_steps, passage.std_error, ev0.mean_pnl,
                                     ev0.std_error, evf.mean_pnl, pass ? "PASS" : "FAIL", note);

            char* a = nullptr;
            char* b = nullptr;
            char* c = nullptr;
            check(gt_walk_stats_to_json(&passage, &a), "stats json");
            check(gt_walk_stats_to_json(&ev0, &b), "stats json");
            check(gt_walk_stats_to_json(&evf, &c), "stats json");
            rows.push_back({{"n", n},
                            {"profit_upper", pu},
                            {"loss_lower", ll},
                            {"linear_ev", eg},
                            {"required_arbitrages", req},
                            {"expected_arbitrage_value", arb},
                            {"expected_crossings", e0},
                            {"first_passage", parse_json(a)},
                            {"grid_ev_no_fee", parse_json(b)},
                            {"grid_ev_fee", parse_json(c)},
                            {"pass", pass}});
        }
        std::cout << (all_pass ? "ALL PASS\n" : "FAILURES PRESENT\n");

        if (!out.empty()) {
            json config = {{"command", "verify-ev"}, {"n_list", n_list}, {"trials", trials}, {"seed", seed},
                           {"principal", principal}, {"k", k},           {"fee", fee}};
            OutputOptions o{out, "json"};
            json meta_config = config;
            meta_config["jobs"] = jobs;
            write_output(o, json{{"config", config}, {"rows", rows}, {"all_pass", all_pass}}.dump(2) + "\n",
                         meta_config, "verify-ev");
        }
        return all_pass ? kExitOk : kExitRuntime;
    }
};

// ---- compare -------------------------------------------------------------------

struct CompareCmd {
    SourceOptions source;
    GridOptions grid;
    BoundOptions bounds;
    OutputOptions output;

    int run() const {
        auto series = source.load();
        const auto [lo, hi] = bounds.resolve(series.get());
        auto spec = grid.spec();
        spec.n_above = grid.half;
        spec.n_below = grid.half;

        auto summary_for = [&](const std::string& which, double fee) {
            gt_report* raw = nullptr;
            if (which == "dgt") {
                auto s = spec;
                s.fee_rate = fee;
                check(gt_run_backtest(series.get(), &s, GT_STRATEGY_DGT, 0, &raw), "dgt");
            } else if (which == "buyhold") {
                check(gt_run_buy_and_hold(series.get(), grid.principal, fee, 0, &raw), "buy-and-hold");
            } else {
                check(gt_run_fixed_bound_grid(series.get(), lo, hi, bounds.grids, grid.principal, fee, 0, &raw),
                      "fixed-bound grid");
            }
            ReportPtr report(raw);
            gt_report_summary s;
            check(gt_report_summary_get(report.get(), &s), "summary");
            return s;
        };
        auto summary_json = [](const gt_report_summary& s) {
            return json{{"irr", s.irr},
                        {"mdd", s.mdd},
                        {"final_equity", s.final_equity},
                        {"trades", s.trade_count},
                        {"resets", s.reset_count},
                        {"final_status", status_name(s.final_status)}};
        };

        json config = {{"command", "compare"}, {"source", source.to_json()}, {"grid", grid.to_json()},
                       {"lower", lo},          {"upper", hi},                {"grids", bounds.grids}};
        config["grid"]["n_above"] = grid.half;
        config["grid"]["n_below"] = grid.half;
        std::cout << "config: " << config.dump() << '\n';
        std::cout << fmt::format("{:<12} {:>12} {:>10} {:>14} {:>12}\n", "strategy", "IRR", "MDD", "IRR (no fee)",
                                 "MDD (no fee)");

        json rows = json::array();
        std::string csv = "strategy,irr,mdd,irr_no_fee,mdd_no_fee\n";
        for (const std::string which : {"dgt", "buyhold", "fixed"}) {
            const auto with_fee = summary_for(which, grid.fee);
            const auto no_fee = summary_for(which, 0.0);
            std::cout << fmt::format("{:<12} {:>12.6f} {:>10.6f} {:>14.6f} {:>12.6f}\n", which, with_fee.irr,
                                     with_fee.mdd, no_fee.irr, no_fee.mdd);
            rows.push_back({{"strategy", which}, {"fee", summary_json(with_fee)}, {"no_fee", summary_json(no_fee)}});
            csv += fmt::format("{},{},{},{},{}\n", which, with_fee.irr, with_fee.mdd, no_fee.irr, no_fee.mdd);
        }

        const std::string body =
            output.format == "json" ? json{{"config", config}, {"rows", rows}}.dump(2) + "\n" : csv;
        json meta_config = config;
        meta_config["input"] = sidecar_inputs_note(source);
        write_output(output, body, meta_config, "compare");
        return kExitOk;
    }
};

void require_even_list(const std::vector<int>& ns) {
    for (int n : ns) {
        if (n < 2 || n % 2 != 0) throw CLI::ValidationError("--n-list", "grid counts must be even and >= 2");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometric grid and dynamic-grid (DGT) backtester"};
    app.set_config("--config", "", "Read options from a TOML/INI config file (flags override it)");
    app.require_subcommand(1);

    FetchCmd fetch;
    auto* fetch_cmd = app.add_subcommand("fetch", "Download 1-minute klines into a CSV cache");
    fetch_cmd->add_option("--symbol", fetch.symbol, "Exchange symbol")->capture_default_str();
    fetch_cmd->add_option("--start", fetch.start, "Window start, ISO-8601 UTC")->required();
    fetch_cmd->add_option("--end", fetch.end, "Window end (exclusive), ISO-8601 UTC")->required();
    fetch_cmd->add_option("--cache", fetch.cache, "Cache CSV to create or extend")->required();
    fetch_cmd->add_option("--base-url", fetch.base_url,
                          "API base URL (default: $GRIDTRADE_KLINES_BASE_URL or https://api.binance.com)");
    fetch_cmd->add_option("--max-retries", fetch.max_retries, "Retries per request")->capture_default_str();

    BacktestCmd backtest;
    auto* backtest_cmd = app.add_subcommand("backtest", "Replay one strategy and report IRR/MDD");
    backtest.source.add(*backtest_cmd);
    backtest.grid.add(*backtest_cmd);
    backtest.bounds.add(*backtest_cmd);
    backtest.output.add(*backtest_cmd);
    backtest_cmd->add_option("--strategy", backtest.strategy, "Strategy")
        ->check(CLI::IsMember({"dgt", "traditional", "buyhold", "fixed"}))
        ->capture_default_str();
    backtest_cmd->add_option("--stride", backtest.stride, "Equity curve down-sampling stride (0 = none)")
        ->capture_default_str();

    SweepCmd sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "IRR table over grid size x grid numbers half");
    sweep.source.add(*sweep_cmd);
    sweep.grid.add(*sweep_cmd);
    sweep.output.add(*sweep_cmd);
    sweep_cmd->add_option("--strategy", sweep.strategy, "Strategy")
        ->check(CLI::IsMember({"dgt", "traditional"}))
        ->capture_default_str();
    sweep_cmd->add_option("--k-list", sweep.k_list, "Comma-separated grid sizes")
        ->delimiter(',')
        ->capture_default_str();
    sweep_cmd->add_option("--half-list", sweep.half_list, "Comma-separated grid numbers half")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep_cmd->add_option("--jobs", sweep.jobs, "Parallel sweep workers")->capture_default_str();

    VerifyCmd verify;
    auto* verify_cmd = app.add_subcommand("verify-ev", "Check the zero expected-value theory by Monte Carlo");
    verify_cmd->add_option("--n-list", verify.n_list, "Comma-separated even grid counts")
        ->delimiter(',')
        ->capture_default_str();
    verify_cmd->add_option("--trials", verify.trials, "Monte Carlo trials per n")->capture_default_str();
    verify_cmd->add_option("--seed", verify.seed, "Base seed")->capture_default_str();
    verify_cmd->add_option("--principal", verify.principal, "Principal M")->capture_default_str();
    verify_cmd->add_option("--k", verify.k, "Step ratio used for fee notionals")->capture_default_str();
    verify_cmd->add_option("--fee", verify.fee, "Fee rate for the negative-EV check")->capture_default_str();
    verify_cmd->add_option("--jobs", verify.jobs, "Worker threads")->capture_default_str();
    verify_cmd->add_option("--out", verify.out, "Write the JSON report here");

    CompareCmd compare;
    auto* compare_cmd = app.add_subcommand("compare", "DGT vs buy-and-hold vs fixed-bound grid");
    compare.source.add(*compare_cmd);
    compare.grid.add(*compare_cmd);
    compare.bounds.add(*compare_cmd);
    compare.output.add(*compare_cmd);

    try {
        app.parse(argc, argv);
        if (verify_cmd->parsed()) require_even_list(verify.n_list);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (fetch_cmd->parsed()) return fetch.run();
        if (backtest_cmd->parsed()) return backtest.run();
        if (sweep_cmd->parsed()) return sweep.run();
        if (verify_cmd->parsed()) return verify.run();
        if (compare_cmd->parsed()) return compare.run();
    } catch (const CommandError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
