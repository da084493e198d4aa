#include "ero/payoffs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ero/parallel.hpp"

namespace ero {

double strike_of(const PayoffSpec& spec) {
    return std::visit([](const auto& p) { return p.strike; }, spec);
}

PayoffSpec with_strike(PayoffSpec spec, double strike) {
    std::visit([strike](auto& p) { p.strike = strike; }, spec);
    return spec;
}

std::string payoff_name(const PayoffSpec& spec) {
    struct Visitor {
        std::string operator()(const Put&) const { return "put"; }
        std::string operator()(const BasketPut&) const { return "basket_put"; }
        std::string operator()(const MaxCall&) const { return "max_call"; }
    };
    return std::visit(Visitor{}, spec);
}

void validate_payoff(const PayoffSpec& spec, int assets) {
    const double strike = strike_of(spec);
    if (!(strike > 0.0) || !std::isfinite(strike)) {
        throw std::invalid_argument("payoff: strike must be positive and finite");
    }
    if (const auto* basket = std::get_if<BasketPut>(&spec)) {
        if (basket->weights.empty()) throw std::invalid_argument("payoff: basket weights are empty");
        for (double w : basket->weights) {
            if (!std::isfinite(w)) throw std::invalid_argument("payoff: basket weights must be finite");
        }
        if (assets > 0 && static_cast<int>(basket->weights.size()) != assets) {
            throw std::invalid_argument("payoff: basket weight count does not match the asset count");
        }
    }
    if (assets > 0 && std::holds_alternative<Put>(spec) && assets != 1) {
        throw std::invalid_argument("payoff: vanilla put needs exactly one asset");
    }
}

double payoff_value(const PayoffSpec& spec, std::span<const double> assets) {
    struct Visitor {
        std::span<const double> s;
        double operator()(const Put& p) const {
            if (s.size() != 1) throw std::invalid_argument("payoff: vanilla put needs exactly one asset");
            return std::max(p.strike - s[0], 0.0);
        }
        double operator()(const BasketPut& p) const {
            if (p.weights.size() != s.size()) {
                throw std::invalid_argument("payoff: basket weight count does not match the asset count");
            }
            double basket = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) basket += p.weights[i] * s[i];
            return std::max(p.strike - basket, 0.0);
        }
        double operator()(const MaxCall& p) const {
            if (s.empty()) throw std::invalid_argument("payoff: max call needs at least one asset");
            return std::max(*std::max_element(s.begin(), s.end()) - p.strike, 0.0);
        }
    };
    return std::visit(Visitor{assets}, spec);
}

PayoffGrid::PayoffGrid(std::size_t paths, int steps)
    : paths_(paths), steps_(steps), values_(paths * stride(), 0.0), itm_(paths * stride(), 0) {}

PayoffGrid discounted_payoff_grid(const PathBatch& batch, const PayoffSpec& spec, double rate) {
    validate_payoff(spec, batch.asset_count());
    const TimeGrid& grid = batch.grid();
    std::vector<double> discount(static_cast<std::size_t>(grid.node_count()));
    for (int n = 0; n <= grid.steps; ++n) discount[static_cast<std::size_t>(n)] = std::exp(-rate * grid.node(n));

    PayoffGrid out(batch.path_count(), grid.steps);
    const auto assets = static_cast<std::size_t>(batch.asset_count());
    for_each_block(batch.path_count(), 1024, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            auto y = out.discounted(m);
            auto itm = out.in_the_money(m);
            for (int n = 0; n <= grid.steps; ++n) {
                const double g = payoff_value(spec, batch.state(m, n).first(assets));
                const auto i = static_cast<std::size_t>(n);
                itm[i] = g > 0.0 ? 1 : 0;
                y[i] = g > 0.0 ? discount[i] * g : 0.0;
            }
        }
    });
    return out;
}

}  // namespace ero
