#pragma once

#include <string>

#include "analytics.hpp"
#include "backtest.hpp"
#include "json.hpp"

namespace gridtrade::io {

// Shortest text that round-trips the double.
std::string format_double(double value);

nlohmann::json to_json(const backtest::BacktestReport& report);
nlohmann::json to_json(const backtest::SweepGrid& sweep);
nlohmann::json to_json(const analytics::WalkStats& stats);
nlohmann::json to_json(const market::GapReport& gaps);

inline constexpr const char* kSweepCsvHeader = "k,half,irr,mdd,trades,resets,final_equity";

// Flat table, one row per report, columns as kSweepCsvHeader.
std::string report_csv(const backtest::BacktestReport& report);
std::string sweep_csv(const backtest::SweepGrid& sweep);

} // namespace gridtrade::io
