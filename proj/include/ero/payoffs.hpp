#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ero/market_models.hpp"

namespace ero {

/// (K - s)^+
struct Put {
    double strike = 100.0;
};

/// (K - w . s)^+
struct BasketPut {
    double strike = 100.0;
    std::vector<double> weights;
};

/// max_i (s_i - K)^+
struct MaxCall {
    double strike = 100.0;
};

using PayoffSpec = std::variant<Put, BasketPut, MaxCall>;

double strike_of(const PayoffSpec& spec);
PayoffSpec with_strike(PayoffSpec spec, double strike);
std::string payoff_name(const PayoffSpec& spec);

/// Throws std::invalid_argument on a non-positive strike, non-finite weights,
/// or a weight count that does not match `assets` (when assets > 0).
void validate_payoff(const PayoffSpec& spec, int assets = 0);

/// Undiscounted payoff of the spot asset vector.
double payoff_value(const PayoffSpec& spec, std::span<const double> assets);

/// Discounted payoffs Y = e^{-r t_n} g(S_{t_n}) and the in-the-money mask g > 0.
class PayoffGrid {
public:
    PayoffGrid(std::size_t paths, int steps);

    std::size_t path_count() const { return paths_; }
    int steps() const { return steps_; }

    std::span<const double> discounted(std::size_t path) const {
        return {values_.data() + path * stride(), stride()};
    }
    std::span<double> discounted(std::size_t path) { return {values_.data() + path * stride(), stride()}; }
    std::span<const std::uint8_t> in_the_money(std::size_t path) const {
        return {itm_.data() + path * stride(), stride()};
    }
    std::span<std::uint8_t> in_the_money(std::size_t path) { return {itm_.data() + path * stride(), stride()}; }

private:
    std::size_t stride() const { return static_cast<std::size_t>(steps_) + 1; }

    std::size_t paths_;
    int steps_;
    std::vector<double> values_;
    std::vector<std::uint8_t> itm_;
};

/// Payoffs read only the spot asset coordinates of each (possibly extended) state.
PayoffGrid discounted_payoff_grid(const PathBatch& batch, const PayoffSpec& spec, double rate);

}  // namespace ero
