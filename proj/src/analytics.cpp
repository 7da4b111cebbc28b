#include "analytics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "market_data.hpp"
#include "rng.hpp"

namespace gridtrade::analytics {

namespace {

void require_even(int n) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("grid count n must be even and >= 2, got " + std::to_string(n));
}

// Mean and sum of squared deviations for one quantity.
struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        count += 1.0;
        const double d = x - mean;
        mean += d / count;
        m2 += d * (x - mean);
    }

    void merge(const Moments& o) {
        if (o.count == 0.0) return;
        if (count == 0.0) {
            *this = o;
            return;
        }
        const double total = count + o.count;
        const double d = o.mean - mean;
        mean += d * o.count / total;
        m2 += o.m2 + d * d * count * o.count / total;
        count = total;
    }

    double std_error() const { return count > 1.0 ? std::sqrt(m2 / (count - 1.0) / count) : 0.0; }
};

struct TrialSample {
    double steps = 0.0;
    double pnl = 0.0;
};

constexpr std::uint64_t kBlockSize = 1024;

template <class TrialFn>
WalkStats run_trials(std::uint64_t trials, std::uint64_t seed, McOptions options, TrialFn trial) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    const std::uint64_t blocks = (trials + kBlockSize - 1) / kBlockSize;
    std::vector<Moments> steps(blocks), pnl(blocks);

    auto run_block = [&](std::uint64_t b) {
        const std::uint64_t begin = b * kBlockSize;
        const std::uint64_t end = std::min(trials, begin + kBlockSize);
        for (std::uint64_t t = begin; t < end; ++t) {
            const TrialSample s = trial(derive_seed(seed, t));
            steps[b].add(s.steps);
            pnl[b].add(s.pnl);
        }
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(blocks)));
    if (jobs == 1) {
        for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back([&] {
                for (std::uint64_t b = next++; b < blocks; b = next++) run_block(b);
            });
        }
        for (auto& t : pool) t.join();
    }

    Moments s, p;
    for (std::uint64_t b = 0; b < blocks; ++b) {
        s.merge(steps[b]);
        p.merge(pnl[b]);
    }
    WalkStats out;
    out.mean_steps = s.mean;
    out.mean_pnl = p.mean;
    out.steps_std_error = s.std_error();
    out.pnl_std_error = p.std_error();
    out.std_error = out.pnl_std_error;
    out.trials = trials;
    out.seed = seed;
    return out;
}

} // namespace

double profit_upper(double principal, int n) {
    require_even(n);
    std::int64_t sum = 0;
    for (int i = 1; i <= n / 2; ++i) sum += i;
    return principal / n * static_cast<double>(sum);
}

double loss_lower(double principal, int n) {
    require_even(n);
    const std::int64_t half = n / 2;
    std::int64_t sum = half * half;
    for (int i = 1; i <= n / 2 - 1; ++i) sum += i;
    return principal / n * static_cast<double>(sum);
}

double linear_ev(double principal, int n) {
    require_even(n);
    const double nd = n;
    return -(principal / n) * (nd * nd / 8.0 - nd / 4.0);
}

double required_arbitrages(int n) {
    require_even(n);
    const double nd = n;
    return nd * nd / 8.0 - nd / 4.0;
}

double expected_crossings(int n) {
    require_even(n);
    const double half = n / 2;
    return half * half;
}

double expected_arbitrage_value(int n) {
    require_even(n);
    const double nd = n;
    return (nd * nd / 4.0 - nd / 2.0) / 2.0;
}

std::vector<double> solve_recurrence(int n) {
    require_even(n);
    const int half = n / 2;
    // E_m = E_0 + offset_m; the boundary E_half = 0 then fixes E_0.
    std::vector<std::int64_t> offset(static_cast<std::size_t>(half) + 1, 0);
    if (half >= 1) offset[1] = -1;
    for (int i = 2; i <= half; ++i) {
        offset[static_cast<std::size_t>(i)] =
            2 * offset[static_cast<std::size_t>(i - 1)] - offset[static_cast<std::size_t>(i - 2)] - 2;
    }
    const std::int64_t e0 = -offset[static_cast<std::size_t>(half)];
    std::vector<double> out;
    out.reserve(offset.size());
    for (const auto c : offset) out.push_back(static_cast<double>(e0 + c));
    return out;
}

void TheoryParams::validate() const {
    require_even(n);
    if (!(principal > 0.0)) throw std::invalid_argument("principal must be > 0");
    if (!(fee_rate >= 0.0 && fee_rate < 1.0)) throw std::invalid_argument("fee_rate must be in [0, 1)");
    if (!(step_ratio > 0.0) || step_ratio * (n / 2) >= 1.0) {
        throw std::invalid_argument("step_ratio must satisfy 0 < k * n/2 < 1");
    }
}

WalkStats mc_first_passage(int n, std::uint64_t trials, std::uint64_t seed, McOptions options) {
    require_even(n);
    const int half = n / 2;
    WalkStats out = run_trials(trials, seed, options, [half](std::uint64_t path_seed) {
        Rng rng(path_seed);
        int offset = 0;
        std::int64_t steps = 0;
        while (offset != half && offset != -half) {
            offset += rng.coin() ? 1 : -1;
            ++steps;
        }
        return TrialSample{static_cast<double>(steps), 0.0};
    });
    out.std_error = out.steps_std_error;
    return out;
}

GridPathResult simulate_grid_path(const TheoryParams& params, std::uint64_t path_seed) {
    const int half = params.n / 2;
    const double lot_step_value = params.principal / params.n;
    const double centre_units = 1.0 / params.step_ratio;

    // Gross P&L is lot_step_value * (sum of sell offsets - sum of buy offsets):
    // every lot bought is eventually sold, so the centre notional cancels.
    std::int64_t offset_balance = 0;
    double notional_units = 0.0;
    auto trade = [&](int offset, int lots, bool sell) {
        offset_balance += static_cast<std::int64_t>(sell ? offset : -offset) * lots;
        notional_units += (centre_units + offset) * lots;
    };

    trade(0, half, false);
    GridPathResult r;
    Rng rng(path_seed);
    int offset = 0;
    std::int64_t down_moves = 0;
    while (offset != half && offset != -half) {
        if (rng.coin()) {
            ++offset;
            trade(offset, 1, true);
        } else {
            --offset;
            trade(offset, 1, false);
            ++down_moves;
        }
        ++r.steps;
    }
    if (offset == -half) trade(offset, 2 * half, true);
    // Every buy is later sold one level up, except the last descent into -half.
    r.round_trips = offset == half ? down_moves : down_moves - half;

    r.final_offset = offset;
    r.pnl = lot_step_value * static_cast<double>(offset_balance) -
            params.fee_rate * lot_step_value * notional_units;
    return r;
}

WalkStats mc_grid_ev(const TheoryParams& params, std::uint64_t trials, std::uint64_t seed, McOptions options) {
    params.validate();
    return run_trials(trials, seed, options, [&params](std::uint64_t path_seed) {
        const GridPathResult r = simulate_grid_path(params, path_seed);
        return TrialSample{static_cast<double>(r.steps), r.pnl};
    });
}

double engine_path_pnl(const grid::GridSpec& spec, double start_price, std::uint64_t path_seed,
                       std::int64_t* steps_out) {
    auto state = grid::PortfolioState::funded(spec.principal);
    auto ladder = grid::build_ladder(start_price, spec);
    grid::initial_allocation(state, ladder, spec, start_price, 0);

    Rng rng(path_seed);
    std::int64_t offset = 0;
    std::int64_t steps = 0;
    double price = start_price;
    while (true) {
        offset += rng.coin() ? 1 : -1;
        ++steps;
        price = market::geometric_price(start_price, spec.grid_size, offset);
        const auto outcome = grid::step_traditional(state, ladder, spec, {steps * market::kMinuteMs, price});
        if (outcome.status != grid::Status::active) break;
    }
    if (steps_out != nullptr) *steps_out = steps;
    return state.equity(price) - spec.principal;
}

WalkStats mc_engine_ev(const grid::GridSpec& spec, double start_price, std::uint64_t trials, std::uint64_t seed,
                       McOptions options) {
    spec.validate();
    if (!(start_price > 0.0)) throw std::invalid_argument("start price must be > 0");
    return run_trials(trials, seed, options, [&](std::uint64_t path_seed) {
        std::int64_t steps = 0;
        const double pnl = engine_path_pnl(spec, start_price, path_seed, &steps);
        return TrialSample{static_cast<double>(steps), pnl};
    });
}

} // namespace gridtrade::analytics
