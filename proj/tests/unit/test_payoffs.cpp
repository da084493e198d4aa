#include <doctest.h>

#include <cmath>
#include <vector>

#include "ero/market_models.hpp"
#include "ero/payoffs.hpp"

using namespace ero;

TEST_CASE("payoff values") {
    const std::vector<double> one = {90.0};
    CHECK(payoff_value(Put{100.0}, one) == 10.0);
    CHECK(payoff_value(Put{80.0}, one) == 0.0);

    const std::vector<double> two = {90.0, 120.0};
    CHECK(payoff_value(BasketPut{110.0, {0.5, 0.5}}, two) == doctest::Approx(5.0));
    CHECK(payoff_value(BasketPut{100.0, {0.5, 0.5}}, two) == 0.0);
    CHECK(payoff_value(MaxCall{100.0}, two) == 20.0);
    CHECK(payoff_value(MaxCall{130.0}, two) == 0.0);
}

TEST_CASE("strike helpers and names") {
    const PayoffSpec basket = BasketPut{100.0, {0.25, 0.75}};
    CHECK(strike_of(basket) == 100.0);
    const auto moved = with_strike(basket, 120.0);
    CHECK(strike_of(moved) == 120.0);
    CHECK(std::get<BasketPut>(moved).weights == std::vector<double>{0.25, 0.75});
    CHECK(payoff_name(Put{}) == "put");
    CHECK(payoff_name(basket) == "basket_put");
    CHECK(payoff_name(MaxCall{}) == "max_call");
}

TEST_CASE("payoff validation") {
    CHECK_THROWS_AS(validate_payoff(Put{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate_payoff(Put{100.0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(validate_payoff(BasketPut{100.0, {0.5}}, 2), std::invalid_argument);
    CHECK_THROWS_AS(validate_payoff(BasketPut{100.0, {0.5, NAN}}, 2), std::invalid_argument);
    CHECK_NOTHROW(validate_payoff(BasketPut{100.0, {0.5, 0.5}}, 2));
    CHECK_NOTHROW(validate_payoff(MaxCall{100.0}, 2));
}

TEST_CASE("discounted payoff grid reads only asset coordinates and zeroes out-of-the-money nodes") {
    HestonSpec spec;
    spec.rate = 0.05;
    spec.kappa = 3.0;
    spec.theta = 0.05;
    spec.xi = 0.5;
    spec.correlation = Eigen::Matrix2d{{1.0, -0.5}, {-0.5, 1.0}};
    spec.spot = {100.0};
    spec.v0 = 0.15;
    const auto grid = make_time_grid(1.0, 8);
    const auto batch = simulate_heston(spec, grid, 500, 3);
    const PayoffSpec put = Put{100.0};
    const auto payoffs = discounted_payoff_grid(batch, put, spec.rate);
    REQUIRE(payoffs.path_count() == 500);
    REQUIRE(payoffs.steps() == 8);
    int itm = 0;
    int otm = 0;
    for (std::size_t m = 0; m < 500; ++m) {
        for (int n = 0; n <= 8; ++n) {
            const auto i = static_cast<std::size_t>(n);
            const double s = batch.state(m, n)[0];
            const double expected = std::exp(-0.05 * grid.node(n)) * std::max(100.0 - s, 0.0);
            CHECK(payoffs.discounted(m)[i] == doctest::Approx(expected).epsilon(1e-14));
            CHECK(static_cast<bool>(payoffs.in_the_money(m)[i]) == (s < 100.0));
            if (!payoffs.in_the_money(m)[i]) {
                CHECK(payoffs.discounted(m)[i] == 0.0);
                ++otm;
            } else {
                ++itm;
            }
        }
    }
    CHECK(itm > 0);
    CHECK(otm > 0);
}

TEST_CASE("lag-extended batches price off the spot coordinates") {
    BlackScholesSpec spec;
    spec.rate = 0.0;
    spec.covariance = Eigen::MatrixXd::Constant(1, 1, 0.09);
    spec.spot = {100.0};
    const auto grid = make_time_grid(1.0, 4);
    const auto batch = simulate_black_scholes(spec, grid, 50, 1);
    const auto lagged = extend_with_lags(batch, LagSpec{{0.5}});
    const auto a = discounted_payoff_grid(batch, Put{100.0}, 0.0);
    const auto b = discounted_payoff_grid(lagged, Put{100.0}, 0.0);
    for (std::size_t m = 0; m < 50; ++m) {
        for (int n = 0; n <= 4; ++n) {
            CHECK(a.discounted(m)[static_cast<std::size_t>(n)] == b.discounted(m)[static_cast<std::size_t>(n)]);
        }
    }
}
