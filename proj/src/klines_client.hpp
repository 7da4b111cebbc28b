#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "errors.hpp"
#include "market_data.hpp"

namespace gridtrade::market {

inline constexpr const char* kKlinesPath = "/api/v3/klines";
inline constexpr const char* kDefaultKlinesBaseUrl = "https://api.binance.com";
inline constexpr const char* kBaseUrlEnvVar = "GRIDTRADE_KLINES_BASE_URL";
inline constexpr int kKlinesPageLimit = 1000;

// Base URL from GRIDTRADE_KLINES_BASE_URL, else the public Binance endpoint.
std::string default_base_url();

struct HttpResponse {
    int status = 0;
    std::string body;
    std::optional<std::chrono::seconds> retry_after;
};

// GET of `path_and_query` against some base URL. Throws NetworkError when
// no response could be obtained at all.
using HttpGet = std::function<HttpResponse(const std::string& path_and_query)>;

HttpGet make_http_transport(const std::string& base_url);

struct FetchOptions {
    int max_retries = 5;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{30'000};
    // Injected so tests can observe waits without sleeping.
    std::function<void(std::chrono::milliseconds)> sleep;
};

// Half-open window [start_ms, end_ms) of bars by open_time.
struct FetchRequest {
    std::string symbol;
    std::string interval = "1m";
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
};

// Carries whatever was fetched before the failure.
class FetchError : public NetworkError {
public:
    FetchError(const std::string& what, CandleSeries partial)
        : NetworkError(what), partial_(std::move(partial)) {}
    const CandleSeries& partial() const noexcept { return partial_; }

private:
    CandleSeries partial_;
};

class KlinesClient {
public:
    explicit KlinesClient(HttpGet transport, FetchOptions options = {});

    // Pages through the window (<= 1000 rows per request, next start =
    // last close_time + 1). Rate-limit replies (429/418) wait Retry-After
    // when given; other retriable failures back off exponentially.
    CandleSeries fetch(const FetchRequest& request);

    std::size_t request_count() const noexcept { return requests_; }

private:
    HttpResponse get_with_retry(const std::string& path_and_query, const CandleSeries& partial);

    HttpGet transport_;
    FetchOptions options_;
    std::size_t requests_ = 0;
};

} // namespace gridtrade::market
