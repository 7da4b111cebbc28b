#include "market_data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <stdexcept>

#include "errors.hpp"
#include "rng.hpp"

namespace gridtrade::market {

namespace {

constexpr std::string_view kCacheHeader = "open_time,open,high,low,close,volume,close_time";

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool well_formed_decimal(std::string_view s) {
    std::size_t i = 0;
    if (i < s.size() && s[i] == '-') ++i;
    const std::size_t int_begin = i;
    while (i < s.size() && is_digit(s[i])) ++i;
    if (i == int_begin) return false;
    if (i == s.size()) return true;
    if (s[i] != '.') return false;
    ++i;
    const std::size_t frac_begin = i;
    while (i < s.size() && is_digit(s[i])) ++i;
    return i == s.size() && i > frac_begin;
}

std::int64_t parse_int64(std::string_view s, const std::string& what) {
    std::int64_t value = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        throw ParseError(what + ": malformed integer '" + std::string(s) + "'");
    }
    return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

Decimal Decimal::parse(std::string_view text) {
    if (!well_formed_decimal(text)) {
        throw ParseError("malformed decimal '" + std::string(text) + "'");
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError("decimal out of range '" + std::string(text) + "'");
    }
    return Decimal(std::string(text), value);
}

Decimal Decimal::from_double(double value) {
    if (!std::isfinite(value)) throw RangeError("non-finite decimal value");
    std::array<char, 512> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
    if (ec != std::errc{}) throw RangeError("decimal value too wide to format");
    std::string text(buf.data(), ptr);
    if (text.find('.') == std::string::npos) text += ".0";
    return Decimal(std::move(text), value);
}

void check_candle(const Candle& c) {
    const double o = c.open.value(), h = c.high.value(), l = c.low.value(), cl = c.close.value();
    if (!(o > 0.0 && h > 0.0 && l > 0.0 && cl > 0.0)) throw DataError("non-positive price");
    if (c.volume.value() < 0.0) throw DataError("negative volume");
    if (h < l) throw DataError("inverted range: high < low");
    if (l > std::min(o, cl) || h < std::max(o, cl)) throw DataError("open/close outside [low, high]");
    if (c.close_time <= c.open_time) throw DataError("close_time not after open_time");
}

std::vector<double> CandleSeries::closes() const {
    std::vector<double> out;
    out.reserve(candles.size());
    for (const auto& c : candles) out.push_back(c.close.value());
    return out;
}

Candle parse_kline_row(const nlohmann::json& row, std::size_t row_index) {
    const std::string where = "kline row " + std::to_string(row_index);
    if (!row.is_array() || row.size() != 12) {
        throw ParseError(where + ": expected 12 elements, got " +
                         (row.is_array() ? std::to_string(row.size()) : std::string("non-array")));
    }
    auto timestamp = [&](std::size_t i, const char* field) -> std::int64_t {
        const auto& v = row[i];
        if (v.is_number_integer()) return v.get<std::int64_t>();
        throw ParseError(where + ", field " + field + ": expected integer timestamp");
    };
    auto decimal = [&](std::size_t i, const char* field) -> Decimal {
        const auto& v = row[i];
        if (!v.is_string()) throw ParseError(where + ", field " + field + ": expected decimal string");
        try {
            return Decimal::parse(v.get_ref<const std::string&>());
        } catch (const ParseError& e) {
            throw ParseError(where + ", field " + field + ": " + e.what());
        }
    };
    Candle c;
    c.open_time = timestamp(0, "open_time");
    c.open = decimal(1, "open");
    c.high = decimal(2, "high");
    c.low = decimal(3, "low");
    c.close = decimal(4, "close");
    c.volume = decimal(5, "volume");
    c.close_time = timestamp(6, "close_time");
    try {
        check_candle(c);
    } catch (const DataError& e) {
        throw ParseError(where + ": " + e.what());
    }
    return c;
}

GapReport validate_series(const CandleSeries& series) {
    GapReport gaps;
    const auto& cs = series.candles;
    for (std::size_t i = 1; i < cs.size(); ++i) {
        const auto prev = cs[i - 1].open_time;
        const auto cur = cs[i].open_time;
        if (cur <= prev) {
            throw DataError("non-monotonic timestamp at index " + std::to_string(i) + " (" +
                            std::to_string(cur) + " after " + std::to_string(prev) + ")");
        }
        const auto delta = cur - prev;
        if (delta > kMinuteMs) {
            gaps.push_back({prev + kMinuteMs, (delta - 1) / kMinuteMs});
        }
    }
    return gaps;
}

void store_cache(const CandleSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open cache for writing: " + path.string());
    out << kCacheHeader << '\n';
    for (const auto& c : series.candles) {
        out << c.open_time << ',' << c.open.text() << ',' << c.high.text() << ',' << c.low.text() << ','
            << c.close.text() << ',' << c.volume.text() << ',' << c.close_time << '\n';
    }
    out.flush();
    if (!out) throw IoError("failed writing cache: " + path.string());
}

CandleSeries load_cache(const std::filesystem::path& path, std::string symbol) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open cache: " + path.string());

    CandleSeries series;
    series.symbol = std::move(symbol);

    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
    };

    ++line_no;
    if (!std::getline(in, line)) fail("missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCacheHeader) fail("unexpected header '" + line + "'");

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_commas(line);
        if (fields.size() != 7) fail("expected 7 fields, got " + std::to_string(fields.size()));
        Candle c;
        try {
            c.open_time = parse_int64(fields[0], "open_time");
            c.open = Decimal::parse(fields[1]);
            c.high = Decimal::parse(fields[2]);
            c.low = Decimal::parse(fields[3]);
            c.close = Decimal::parse(fields[4]);
            c.volume = Decimal::parse(fields[5]);
            c.close_time = parse_int64(fields[6], "close_time");
            check_candle(c);
        } catch (const std::runtime_error& e) {
            fail(e.what());
        }
        if (!series.candles.empty()) {
            const auto prev = series.candles.back().open_time;
            if (c.open_time == prev) {
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": duplicate timestamp " +
                                std::to_string(c.open_time));
            }
            if (c.open_time < prev) {
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-monotonic timestamp " +
                                std::to_string(c.open_time));
            }
        }
        series.candles.push_back(std::move(c));
    }
    return series;
}

CandleSeries merge_series(const CandleSeries& older, const CandleSeries& newer) {
    std::map<std::int64_t, const Candle*> by_time;
    for (const auto& c : older.candles) by_time[c.open_time] = &c;
    for (const auto& c : newer.candles) by_time[c.open_time] = &c;
    CandleSeries out;
    out.symbol = newer.symbol.empty() ? older.symbol : newer.symbol;
    out.interval = newer.interval;
    out.candles.reserve(by_time.size());
    for (const auto& [t, c] : by_time) out.candles.push_back(*c);
    return out;
}

void WalkParams::validate() const {
    if (!(start_price > 0.0) || !std::isfinite(start_price)) throw std::invalid_argument("start_price must be > 0");
    if (!(step_ratio > 0.0 && step_ratio < 1.0)) throw std::invalid_argument("step_ratio must be in (0, 1)");
    if (!(p_up >= 0.0 && p_up <= 1.0)) throw std::invalid_argument("p_up must be in [0, 1]");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be positive");
}

CandleSeries synth_random_walk(const WalkParams& params, std::string symbol) {
    params.validate();
    CandleSeries series;
    series.symbol = std::move(symbol);
    series.candles.reserve(static_cast<std::size_t>(params.n_steps));

    Rng rng(params.seed);
    const Decimal zero = Decimal::parse("0");
    std::int64_t offset = 0;
    Decimal open = Decimal::from_double(params.start_price);
    for (std::int64_t i = 0; i < params.n_steps; ++i) {
        offset += rng.bernoulli(params.p_up) ? 1 : -1;
        const double close_value = geometric_price(params.start_price, params.step_ratio, offset);
        if (!std::isfinite(close_value) || close_value <= 0.0) {
            throw RangeError("synthetic walk left the representable price range");
        }
        Decimal close = Decimal::from_double(close_value);
        Candle c;
        c.open_time = params.start_time_ms + i * kMinuteMs;
        c.close_time = c.open_time + kMinuteMs - 1;
        const bool up = close.value() >= open.value();
        c.high = up ? close : open;
        c.low = up ? open : close;
        c.open = open;
        c.close = close;
        c.volume = zero;
        series.candles.push_back(c);
        open = std::move(close);
    }
    return series;
}

} // namespace gridtrade::market
