#pragma once

#include <cstdint>
#include <vector>

#include "grid_engine.hpp"

namespace gridtrade::analytics {

// Closed forms for a symmetric grid with n (even, >= 2) grids and principal M.
// All reject odd or too-small n with std::invalid_argument.
double profit_upper(double principal, int n);
double loss_lower(double principal, int n);
double linear_ev(double principal, int n);
double required_arbitrages(int n);
double expected_crossings(int n);
double expected_arbitrage_value(int n);

// E_0..E_{n/2} from E_i = 2E_{i-1} - E_{i-2} - 2, E_1 = E_0 - 1, E_{n/2} = 0.
std::vector<double> solve_recurrence(int n);

struct TheoryParams {
    int n = 6;
    double principal = 600.0;
    double step_ratio = 0.01; // only sets trade notionals for fees
    double fee_rate = 0.0;

    void validate() const;
};

struct WalkStats {
    double mean_steps = 0.0;
    double mean_pnl = 0.0;
    // Standard error of the headline estimate: mean_steps for
    // mc_first_passage, mean_pnl for the two P&L estimators.
    double std_error = 0.0;
    double steps_std_error = 0.0;
    double pnl_std_error = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

// Every trial draws from its own stream derive_seed(seed, trial), and trials
// are reduced in fixed blocks, so `jobs` never changes the result.
struct McOptions {
    unsigned jobs = 1;
};

WalkStats mc_first_passage(int n, std::uint64_t trials, std::uint64_t seed, McOptions options = {});

// Step-space grid: +-1 level walk from the centre until |offset| = n/2.
// One lot per level; a one-level move of one lot is worth M/n, so a
// buy-sell round trip earns M/n and level prices are (1 + offset*k) in
// units of the centre price. The inventory left at the boundary is sold
// there. Fees are charged on every trade's notional.
struct GridPathResult {
    std::int64_t steps = 0;
    int final_offset = 0;
    std::int64_t round_trips = 0;
    double pnl = 0.0;
};
GridPathResult simulate_grid_path(const TheoryParams& params, std::uint64_t path_seed);

WalkStats mc_grid_ev(const TheoryParams& params, std::uint64_t trials, std::uint64_t seed, McOptions options = {});

// Traditional engine over symmetric synthetic walks started at a ladder
// reference, run until termination; pnl is final equity - M.
double engine_path_pnl(const grid::GridSpec& spec, double start_price, std::uint64_t path_seed,
                       std::int64_t* steps_out = nullptr);

WalkStats mc_engine_ev(const grid::GridSpec& spec, double start_price, std::uint64_t trials, std::uint64_t seed,
                       McOptions options = {});

} // namespace gridtrade::analytics
