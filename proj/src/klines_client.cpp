#include "klines_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "httplib.h"

namespace gridtrade::market {

std::string default_base_url() {
    if (const char* env = std::getenv(kBaseUrlEnvVar); env != nullptr && *env != '\0') return env;
    return kDefaultKlinesBaseUrl;
}

HttpGet make_http_transport(const std::string& base_url) {
    auto client = std::make_shared<httplib::Client>(base_url);
    client->set_connection_timeout(10, 0);
    client->set_read_timeout(30, 0);
    return [client](const std::string& path_and_query) {
        auto res = client->Get(path_and_query);
        if (!res) throw NetworkError("HTTP request failed: " + httplib::to_string(res.error()));
        HttpResponse out;
        out.status = res->status;
        out.body = std::move(res->body);
        if (res->has_header("Retry-After")) {
            try {
                out.retry_after = std::chrono::seconds(std::stoll(res->get_header_value("Retry-After")));
            } catch (const std::exception&) {
                // non-numeric Retry-After (HTTP date) falls back to backoff
            }
        }
        return out;
    };
}

KlinesClient::KlinesClient(HttpGet transport, FetchOptions options)
    : transport_(std::move(transport)), options_(std::move(options)) {
    if (!options_.sleep) {
        options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

HttpResponse KlinesClient::get_with_retry(const std::string& path_and_query, const CandleSeries& partial) {
    std::string last_error;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        ++requests_;
        std::optional<std::chrono::milliseconds> wait;
        try {
            HttpResponse res = transport_(path_and_query);
            if (res.status == 200) return res;
            last_error = "HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200);
            const bool rate_limited = res.status == 429 || res.status == 418;
            if (!rate_limited && res.status < 500) throw FetchError(last_error, partial);
            if (rate_limited && res.retry_after) wait = *res.retry_after;
        } catch (const FetchError&) {
            throw;
        } catch (const NetworkError& e) {
            last_error = e.what();
        }
        if (attempt == options_.max_retries) break;
        if (!wait) {
            const auto backoff = options_.initial_backoff * (std::int64_t{1} << std::min(attempt, 20));
            wait = std::min<std::chrono::milliseconds>(backoff, options_.max_backoff);
        }
        options_.sleep(*wait);
    }
    throw FetchError("giving up after " + std::to_string(options_.max_retries + 1) + " attempts: " + last_error,
                     partial);
}

CandleSeries KlinesClient::fetch(const FetchRequest& request) {
    if (request.symbol.empty()) throw std::invalid_argument("symbol must not be empty");
    if (request.interval != "1m") throw std::invalid_argument("only the 1m interval is supported");
    if (request.start_ms >= request.end_ms) throw std::invalid_argument("start_ms must be before end_ms");

    CandleSeries series;
    series.symbol = request.symbol;
    series.interval = request.interval;

    std::int64_t cursor = request.start_ms;
    std::size_t row_index = 0;
    while (cursor < request.end_ms) {
        const std::string query = std::string(kKlinesPath) + "?symbol=" + request.symbol +
                                  "&interval=" + request.interval + "&startTime=" + std::to_string(cursor) +
                                  "&endTime=" + std::to_string(request.end_ms - 1) +
                                  "&limit=" + std::to_string(kKlinesPageLimit);
        const HttpResponse res = get_with_retry(query, series);

        nlohmann::json page;
        try {
            page = nlohmann::json::parse(res.body);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("klines response is not JSON: ") + e.what());
        }
        if (!page.is_array()) throw ParseError("klines response is not a JSON array");
        if (page.empty()) break;

        bool reached_end = false;
        for (const auto& row : page) {
            Candle c = parse_kline_row(row, row_index++);
            if (c.open_time >= request.end_ms) {
                reached_end = true;
                break;
            }
            series.candles.push_back(std::move(c));
        }
        if (reached_end) break;
        const std::int64_t next = series.candles.empty() ? request.end_ms : series.candles.back().close_time + 1;
        if (next <= cursor) throw DataError("klines pagination did not advance");
        cursor = next;
        if (page.size() < static_cast<std::size_t>(kKlinesPageLimit)) break;
    }
    validate_series(series);
    return series;
}

} // namespace gridtrade::market
