#include "grid_engine.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <stdexcept>
#include <string>

#include "errors.hpp"
#include "market_data.hpp"

namespace gridtrade::grid {

void GridSpec::validate() const {
    if (!(grid_size > 0.0 && grid_size < 1.0)) throw std::invalid_argument("grid_size must be in (0, 1)");
    if (n_above < 1 || n_below < 1) throw std::invalid_argument("n_above and n_below must be >= 1");
    if (!(fee_rate >= 0.0 && fee_rate < 1.0)) throw std::invalid_argument("fee_rate must be in [0, 1)");
    if (!(principal > 0.0) || !std::isfinite(principal)) throw std::invalid_argument("principal must be > 0");
    if (max_fills_per_candle < 0) throw std::invalid_argument("max_fills_per_candle must be >= 0");
    if (!(minimum_principal >= 0.0)) throw std::invalid_argument("minimum_principal must be >= 0");
}

GridSpec GridSpec::symmetric(double grid_size, int half, double principal, double fee_rate) {
    GridSpec spec;
    spec.grid_size = grid_size;
    spec.n_above = half;
    spec.n_below = half;
    spec.principal = principal;
    spec.fee_rate = fee_rate;
    return spec;
}

Ladder::Ladder(std::vector<double> levels, int black, double reference, double grid_size)
    : levels_(std::move(levels)), black_(black), reference_(reference), grid_size_(grid_size) {
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (!std::isfinite(levels_[i]) || levels_[i] < DBL_MIN) {
            throw RangeError("ladder level " + std::to_string(i) + " outside the representable range");
        }
        if (i > 0 && !(levels_[i] > levels_[i - 1])) {
            throw RangeError("ladder levels not strictly increasing at " + std::to_string(i));
        }
    }
}

Ladder Ladder::geometric(double reference, const GridSpec& spec) {
    spec.validate();
    if (!(reference > 0.0) || !std::isfinite(reference)) throw std::invalid_argument("reference price must be > 0");
    const int n = spec.total();
    std::vector<double> levels(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        levels[static_cast<std::size_t>(i)] = market::geometric_price(reference, spec.grid_size, i - spec.n_below);
    }
    return Ladder(std::move(levels), spec.n_below, reference, spec.grid_size);
}

Ladder Ladder::bounded(double lower, double upper, int n, double start_price) {
    if (!(lower > 0.0) || !(upper > lower)) throw std::invalid_argument("bounds must satisfy 0 < lower < upper");
    if (n < 2) throw std::invalid_argument("a bounded grid needs at least 2 grids");
    if (!(start_price > lower && start_price < upper)) {
        throw std::invalid_argument("start price must lie strictly inside the bounds");
    }
    const double k = std::pow(upper / lower, 1.0 / n) - 1.0;
    std::vector<double> levels(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < n; ++i) levels[static_cast<std::size_t>(i)] = market::geometric_price(lower, k, i);
    levels.back() = upper;
    const double position = std::log(start_price / lower) / std::log1p(k);
    const int black = std::clamp(static_cast<int>(std::lround(position)), 1, n - 1);
    const double reference = levels[static_cast<std::size_t>(black)];
    return Ladder(std::move(levels), black, reference, k);
}

void Ladder::mark_black(int index) {
    if (index < 0 || index > grid_count()) throw InvariantError("black index out of ladder range");
    black_ = index;
}

std::vector<CrossEvent> crossings(const Ladder& ladder, double price) {
    std::vector<CrossEvent> out;
    const auto& lv = ladder.levels();
    const int b = ladder.black_index();
    if (price > lv[static_cast<std::size_t>(b)]) {
        for (int i = b + 1; i <= ladder.grid_count() && lv[static_cast<std::size_t>(i)] <= price; ++i) {
            out.push_back({Direction::up, i});
        }
    } else if (price < lv[static_cast<std::size_t>(b)]) {
        for (int i = b - 1; i >= 0 && lv[static_cast<std::size_t>(i)] >= price; --i) {
            out.push_back({Direction::down, i});
        }
    }
    return out;
}

PortfolioState PortfolioState::funded(double principal) {
    PortfolioState s;
    s.quote = principal;
    s.input_money = principal;
    s.principal = principal;
    return s;
}

std::optional<Fill> initial_allocation(PortfolioState& state, const Ladder& ladder, const GridSpec& spec,
                                       double start_price, std::int64_t time_ms) {
    if (!(start_price > 0.0)) throw std::invalid_argument("start price must be > 0");
    const double principal = state.principal;
    if (state.quote < principal * (1.0 - 1e-12)) throw DataError("insufficient quote for the initial allocation");
    const int above = ladder.gray_above();
    if (above == 0) return std::nullopt;

    const double spend = principal * above / ladder.grid_count();
    const double fee = spend * spec.fee_rate;
    Fill f;
    f.time_ms = time_ms;
    f.side = Side::buy;
    f.kind = FillKind::allocation;
    f.level_index = ladder.black_index();
    f.price = start_price;
    f.base_qty = spend * (1.0 - spec.fee_rate) / start_price;
    f.quote_delta = -spend;
    f.fee_paid = fee;

    state.quote -= spend;
    state.base += f.base_qty;
    state.fills.push_back(f);
    return f;
}

Fill apply_cross(PortfolioState& state, Ladder& ladder, const GridSpec& spec, const CrossEvent& cross,
                 std::int64_t time_ms) {
    const int b = ladder.black_index();
    const bool up = cross.direction == Direction::up;
    if (cross.level_index != (up ? b + 1 : b - 1)) throw InvariantError("cross is not adjacent to the black level");
    const int g = up ? ladder.grid_count() - b : b;
    if (g <= 0) throw InvariantError("no gray level left in the crossing direction");

    Fill f;
    f.time_ms = time_ms;
    f.kind = FillKind::grid;
    f.level_index = cross.level_index;
    f.price = ladder.price(cross.level_index);

    if (up) {
        const double qty = g == 1 ? state.base : state.base / g;
        const double proceeds = qty * f.price;
        f.side = Side::sell;
        f.base_qty = qty;
        f.fee_paid = proceeds * spec.fee_rate;
        f.quote_delta = proceeds * (1.0 - spec.fee_rate);
        state.base = g == 1 ? 0.0 : state.base - qty;
        state.quote += f.quote_delta;
    } else {
        const double spend = g == 1 ? state.quote : state.quote / g;
        f.side = Side::buy;
        f.base_qty = spend * (1.0 - spec.fee_rate) / f.price;
        f.fee_paid = spend * spec.fee_rate;
        f.quote_delta = -spend;
        state.quote = g == 1 ? 0.0 : state.quote - spend;
        state.base += f.base_qty;
    }
    ladder.mark_black(cross.level_index);
    state.fills.push_back(f);
    return f;
}

std::string_view to_string(Status status) noexcept {
    switch (status) {
        case Status::active: return "active";
        case Status::terminated_above: return "terminated_above";
        case Status::terminated_below: return "terminated_below";
        case Status::reset_above: return "reset_above";
        case Status::reset_below: return "reset_below";
    }
    return "unknown";
}

std::string_view to_string(Direction direction) noexcept { return direction == Direction::up ? "above" : "below"; }

std::string_view to_string(Side side) noexcept { return side == Side::buy ? "buy" : "sell"; }

namespace {

void run_crossings(PortfolioState& state, Ladder& ladder, const GridSpec& spec, PricePoint bar) {
    const auto events = crossings(ladder, bar.close);
    const std::size_t cap =
        spec.max_fills_per_candle > 0 ? static_cast<std::size_t>(spec.max_fills_per_candle) : events.size();
    for (std::size_t i = 0; i < events.size() && i < cap; ++i) apply_cross(state, ladder, spec, events[i], bar.time_ms);
}

bool broke_above(const Ladder& ladder, double close) {
    return close > ladder.top() && ladder.black_index() == ladder.grid_count();
}

bool broke_below(const Ladder& ladder, double close) { return close < ladder.bottom() && ladder.black_index() == 0; }

std::vector<Fill> fills_since(const PortfolioState& state, std::size_t mark) {
    return {state.fills.begin() + static_cast<std::ptrdiff_t>(mark), state.fills.end()};
}

} // namespace

StrategyOutcome step_traditional(PortfolioState& state, Ladder& ladder, const GridSpec& spec, PricePoint bar) {
    const std::size_t mark = state.fills.size();
    StrategyOutcome out;
    run_crossings(state, ladder, spec, bar);
    if (broke_above(ladder, bar.close)) {
        out.status = Status::terminated_above;
    } else if (broke_below(ladder, bar.close)) {
        out.status = Status::terminated_below;
    }
    out.events = fills_since(state, mark);
    return out;
}

StrategyOutcome step_dgt(PortfolioState& state, std::optional<Ladder>& ladder, const GridSpec& spec,
                         PricePoint bar) {
    StrategyOutcome out;
    if (!ladder) return out;
    const std::size_t mark = state.fills.size();
    run_crossings(state, *ladder, spec, bar);
    if (broke_above(*ladder, bar.close)) {
        ladder = reset_grid(state, spec, bar.close, Direction::up, bar.time_ms);
        out.status = Status::reset_above;
    } else if (broke_below(*ladder, bar.close)) {
        ladder = reset_grid(state, spec, bar.close, Direction::down, bar.time_ms);
        out.status = Status::reset_below;
    }
    out.events = fills_since(state, mark);
    return out;
}

std::optional<Ladder> reset_grid(PortfolioState& state, const GridSpec& spec, double new_center_price,
                                 Direction direction, std::int64_t time_ms) {
    std::optional<Ladder> ladder;
    // Leftover base (none after a complete boundary fill) is kept, not sold off-level.
    state.carry_base += state.base;
    state.base = 0.0;

    if (direction == Direction::up) {
        const double profit = state.quote - state.principal;
        if (profit >= 0.0) {
            state.wallet += profit;
            state.quote = state.principal;
        } else {
            state.principal = state.quote;
        }
    } else {
        state.wallet += state.quote;
        state.quote = 0.0;
        const double next_principal = std::max(state.wallet, 0.0);
        if (next_principal >= spec.minimum_principal && next_principal > 0.0) {
            state.wallet -= next_principal;
            state.quote = next_principal;
            state.principal = next_principal;
        } else {
            state.principal = 0.0;
        }
    }

    if (state.principal > 0.0) {
        ladder = build_ladder(new_center_price, spec);
        initial_allocation(state, *ladder, spec, new_center_price, time_ms);
    }
    state.resets.push_back({time_ms, direction, new_center_price, state.wallet, state.input_money, state.principal,
                            !ladder.has_value()});
    return ladder;
}

} // namespace gridtrade::grid
