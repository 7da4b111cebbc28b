#include "report_io.hpp"

#include <array>
#include <charconv>

namespace gridtrade::io {

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return "nan";
    return {buf.data(), ptr};
}

namespace {

nlohmann::json fill_json(const grid::Fill& f) {
    return {{"time_ms", f.time_ms},
            {"side", grid::to_string(f.side)},
            {"kind", f.kind == grid::FillKind::grid ? "grid" : "allocation"},
            {"level_index", f.level_index},
            {"price", f.price},
            {"base_qty", f.base_qty},
            {"quote_delta", f.quote_delta},
            {"fee_paid", f.fee_paid}};
}

void append_row(std::string& out, const backtest::BacktestReport& r) {
    out += format_double(r.grid_size);
    out += ',';
    out += std::to_string(r.n_above);
    out += ',';
    out += format_double(r.irr);
    out += ',';
    out += format_double(r.mdd);
    out += ',';
    out += std::to_string(r.trade_count);
    out += ',';
    out += std::to_string(r.reset_count);
    out += ',';
    out += format_double(r.final_equity);
    out += '\n';
}

} // namespace

nlohmann::json to_json(const backtest::BacktestReport& r) {
    nlohmann::json j;
    j["strategy"] = backtest::to_string(r.strategy);
    j["final_status"] = grid::to_string(r.final_status);
    j["terminated_at_ms"] = r.terminated_at_ms ? nlohmann::json(*r.terminated_at_ms) : nlohmann::json(nullptr);
    j["params"] = {{"grid_size", r.grid_size},
                   {"n_above", r.n_above},
                   {"n_below", r.n_below},
                   {"fee_rate", r.fee_rate},
                   {"principal", r.principal}};
    j["irr"] = r.irr;
    j["mdd"] = r.mdd;
    j["trade_count"] = r.trade_count;
    j["reset_count"] = r.reset_count;
    j["initial_equity"] = r.initial_equity;
    j["final_equity"] = r.final_equity;
    j["final_wallet"] = r.final_wallet;
    j["start_ms"] = r.start_ms;
    j["end_ms"] = r.end_ms;
    j["candles"] = r.candles;

    auto curve = nlohmann::json::array();
    for (const auto& p : r.equity_curve) curve.push_back({p.time_ms, p.equity});
    j["equity_curve"] = std::move(curve);

    auto resets = nlohmann::json::array();
    for (const auto& s : r.reset_snapshots) {
        resets.push_back({{"time_ms", s.time_ms},
                          {"direction", grid::to_string(s.direction)},
                          {"center_price", s.center_price},
                          {"wallet", s.wallet},
                          {"input_money", s.input_money},
                          {"principal", s.principal},
                          {"dormant", s.dormant}});
    }
    j["reset_snapshots"] = std::move(resets);

    auto fills = nlohmann::json::array();
    for (const auto& f : r.fills) fills.push_back(fill_json(f));
    j["fills"] = std::move(fills);
    return j;
}

nlohmann::json to_json(const backtest::SweepGrid& sweep) {
    nlohmann::json j;
    j["strategy"] = backtest::to_string(sweep.strategy);
    j["grid_sizes"] = sweep.grid_sizes;
    j["half_counts"] = sweep.half_counts;
    auto cells = nlohmann::json::array();
    for (std::size_t ki = 0; ki < sweep.grid_sizes.size(); ++ki) {
        for (std::size_t hi = 0; hi < sweep.half_counts.size(); ++hi) {
            const auto& r = sweep.at(ki, hi);
            cells.push_back({{"k", sweep.grid_sizes[ki]},
                             {"half", sweep.half_counts[hi]},
                             {"irr", r.irr},
                             {"mdd", r.mdd},
                             {"trades", r.trade_count},
                             {"resets", r.reset_count},
                             {"final_equity", r.final_equity}});
        }
    }
    j["cells"] = std::move(cells);
    return j;
}

nlohmann::json to_json(const analytics::WalkStats& s) {
    return {{"mean_steps", s.mean_steps},
            {"mean_pnl", s.mean_pnl},
            {"std_error", s.std_error},
            {"steps_std_error", s.steps_std_error},
            {"pnl_std_error", s.pnl_std_error},
            {"trials", s.trials},
            {"seed", s.seed}};
}

nlohmann::json to_json(const market::GapReport& gaps) {
    auto j = nlohmann::json::array();
    for (const auto& g : gaps) j.push_back({{"gap_start_ms", g.gap_start_ms}, {"missing_bars", g.missing_bars}});
    return j;
}

std::string report_csv(const backtest::BacktestReport& report) {
    std::string out = kSweepCsvHeader;
    out += '\n';
    append_row(out, report);
    return out;
}

std::string sweep_csv(const backtest::SweepGrid& sweep) {
    std::string out = kSweepCsvHeader;
    out += '\n';
    for (const auto& r : sweep.cells) append_row(out, r);
    return out;
}

} // namespace gridtrade::io
