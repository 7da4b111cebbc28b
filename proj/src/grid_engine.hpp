#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace gridtrade::grid {

enum class Side { buy, sell };

// An allocation fill seeds a fresh ladder; grid fills are triggered by level crossings.
enum class FillKind { allocation, grid };

enum class Direction { up, down };

struct GridSpec {
    double grid_size = 0.01; // k, adjacent levels differ by a factor 1+k
    int n_above = 5;
    int n_below = 5;
    double fee_rate = 0.0008;
    double principal = 1000.0;
    int max_fills_per_candle = 0; // 0 means unlimited
    double minimum_principal = 10.0; // DGT: below this a downward reset goes dormant

    int total() const noexcept { return n_above + n_below; }
    void validate() const;

    static GridSpec symmetric(double grid_size, int half, double principal, double fee_rate);
};

// n+1 increasing prices with one black (current) level; all others are gray.
class Ladder {
public:
    // Table-1 geometry: level_i = P * (1+k)^(i - n_below), black at the reference.
    static Ladder geometric(double reference, const GridSpec& spec);
    // Fixed-bound geometric ladder from `lower` to `upper` with `n` grids.
    // The black level is the one nearest `start_price`, kept off both ends.
    static Ladder bounded(double lower, double upper, int n, double start_price);

    const std::vector<double>& levels() const noexcept { return levels_; }
    double price(int index) const { return levels_.at(static_cast<std::size_t>(index)); }
    int grid_count() const noexcept { return static_cast<int>(levels_.size()) - 1; }
    int black_index() const noexcept { return black_; }
    double black_price() const noexcept { return levels_[static_cast<std::size_t>(black_)]; }
    double reference() const noexcept { return reference_; }
    double top() const noexcept { return levels_.back(); }
    double bottom() const noexcept { return levels_.front(); }
    double grid_size() const noexcept { return grid_size_; }

    int gray_above() const noexcept { return grid_count() - black_; }
    int gray_below() const noexcept { return black_; }

    void mark_black(int index);

private:
    Ladder(std::vector<double> levels, int black, double reference, double grid_size);

    std::vector<double> levels_;
    int black_ = 0;
    double reference_ = 0.0;
    double grid_size_ = 0.0;
};

inline Ladder build_ladder(double reference, const GridSpec& spec) { return Ladder::geometric(reference, spec); }

struct CrossEvent {
    Direction direction = Direction::up;
    int level_index = 0;

    bool operator==(const CrossEvent&) const = default;
};

// Gray levels touched or passed moving from the black level to `price`,
// nearest first.
std::vector<CrossEvent> crossings(const Ladder& ladder, double price);

struct Fill {
    std::int64_t time_ms = 0;
    Side side = Side::buy;
    FillKind kind = FillKind::grid;
    int level_index = 0;
    double price = 0.0;
    double base_qty = 0.0;
    double quote_delta = 0.0; // signed, net of fee
    double fee_paid = 0.0;    // in quote

    bool operator==(const Fill&) const = default;
};

struct ResetSnapshot {
    std::int64_t time_ms = 0;
    Direction direction = Direction::up;
    double center_price = 0.0;
    double wallet = 0.0;
    double input_money = 0.0;
    double principal = 0.0; // principal of the grid armed by the reset, 0 when dormant
    bool dormant = false;

    bool operator==(const ResetSnapshot&) const = default;
};

struct PortfolioState {
    double quote = 0.0;
    double base = 0.0;
    double carry_base = 0.0; // set aside by downward DGT resets; never traded again
    double wallet = 0.0;
    double input_money = 0.0;
    double principal = 0.0; // nominal principal of the active grid
    std::vector<Fill> fills;
    std::vector<ResetSnapshot> resets;

    static PortfolioState funded(double principal);

    double grid_equity(double price) const noexcept { return quote + base * price; }
    double equity(double price) const noexcept { return quote + (base + carry_base) * price + wallet; }
};

// Spends principal * (gray levels above) / n at `start_price`; the rest stays in quote.
std::optional<Fill> initial_allocation(PortfolioState& state, const Ladder& ladder, const GridSpec& spec,
                                       double start_price, std::int64_t time_ms);

// Executes one crossing at the crossed level price and recolors the ladder.
// Up: sell 1/G of base, G = gray levels from the crossed one to the top.
// Down: spend 1/G of quote, G = gray levels from the crossed one to the bottom.
Fill apply_cross(PortfolioState& state, Ladder& ladder, const GridSpec& spec, const CrossEvent& cross,
                 std::int64_t time_ms);

enum class Status { active, terminated_above, terminated_below, reset_above, reset_below };

std::string_view to_string(Status status) noexcept;
std::string_view to_string(Direction direction) noexcept;
std::string_view to_string(Side side) noexcept;

struct StrategyOutcome {
    Status status = Status::active;
    std::vector<Fill> events;
};

struct PricePoint {
    std::int64_t time_ms = 0;
    double close = 0.0;
};

// Close-only evaluation. Breakout requires the close beyond the outer level
// and the black level already at that end, so every boundary fill has run.
StrategyOutcome step_traditional(PortfolioState& state, Ladder& ladder, const GridSpec& spec, PricePoint bar);

// Like step_traditional but breakouts recenter instead of terminating.
// `ladder` is empty while the strategy is dormant.
StrategyOutcome step_dgt(PortfolioState& state, std::optional<Ladder>& ladder, const GridSpec& spec,
                         PricePoint bar);

// Above: profit (grid equity - principal) moves to the wallet and the same
// principal is redeployed; a loss shrinks the principal instead. Below: base
// moves to the carry account and the wallet funds the new grid; nullopt when
// that principal is under spec.minimum_principal (dormant).
std::optional<Ladder> reset_grid(PortfolioState& state, const GridSpec& spec, double new_center_price,
                                 Direction direction, std::int64_t time_ms);

} // namespace gridtrade::grid
