#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace gridtrade::market {

inline constexpr std::int64_t kMinuteMs = 60'000;

// A non-negative decimal that keeps its exact wire/cache text next to the
// binary value used at replay time. Equality compares the text, so a
// store/load cycle is bit-exact.
class Decimal {
public:
    Decimal() = default;

    // Accepts `[-]digits[.digits]`. Throws ParseError on anything else.
    static Decimal parse(std::string_view text);
    // Shortest fixed-notation text that round-trips to `value`.
    static Decimal from_double(double value);

    const std::string& text() const noexcept { return text_; }
    double value() const noexcept { return value_; }

    bool operator==(const Decimal& other) const noexcept { return text_ == other.text_; }

private:
    Decimal(std::string text, double value) : text_(std::move(text)), value_(value) {}

    std::string text_ = "0";
    double value_ = 0.0;
};

struct Candle {
    std::int64_t open_time = 0;
    Decimal open;
    Decimal high;
    Decimal low;
    Decimal close;
    Decimal volume;
    std::int64_t close_time = 0;

    bool operator==(const Candle&) const = default;
};

// Throws DataError describing the first violated candle invariant.
void check_candle(const Candle& candle);

struct CandleSeries {
    std::string symbol;
    std::string interval = "1m";
    std::vector<Candle> candles;

    bool empty() const noexcept { return candles.empty(); }
    std::size_t size() const noexcept { return candles.size(); }
    std::vector<double> closes() const;

    bool operator==(const CandleSeries&) const = default;
};

struct Gap {
    std::int64_t gap_start_ms = 0; // open_time of the first missing bar
    std::int64_t missing_bars = 0;

    bool operator==(const Gap&) const = default;
};

using GapReport = std::vector<Gap>;

// Decodes one row of the exchange klines response (12-element array).
// `row_index` only feeds error messages.
Candle parse_kline_row(const nlohmann::json& row, std::size_t row_index = 0);

// Lists missing 1-minute bars. Throws DataError on non-increasing open_time.
GapReport validate_series(const CandleSeries& series);

// CSV cache: header `open_time,open,high,low,close,volume,close_time`, LF endings.
void store_cache(const CandleSeries& series, const std::filesystem::path& path);
CandleSeries load_cache(const std::filesystem::path& path, std::string symbol = {});

// Merges two series keyed by open_time; on overlap the candle from `newer` wins.
CandleSeries merge_series(const CandleSeries& older, const CandleSeries& newer);

struct WalkParams {
    double start_price = 100.0;
    double step_ratio = 0.01; // k
    double p_up = 0.5;
    std::int64_t n_steps = 1000;
    std::uint64_t seed = 0;
    std::int64_t start_time_ms = 0;

    void validate() const;
};

// P * (1+k)^offset. Shared by the ladder and the synthetic walk so that
// a walk started at a ladder's reference touches its levels exactly.
inline double geometric_price(double reference, double step_ratio, std::int64_t offset) {
    return reference * std::pow(1.0 + step_ratio, static_cast<double>(offset));
}

// One candle per step: open = previous close, close = open*(1+k) or open/(1+k).
CandleSeries synth_random_walk(const WalkParams& params, std::string symbol = "SYNTH");

} // namespace gridtrade::market
