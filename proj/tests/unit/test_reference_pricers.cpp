#include <doctest.h>

#include <cmath>
#include <vector>

#include "ero/market_models.hpp"
#include "ero/optimizer.hpp"
#include "ero/payoffs.hpp"
#include "ero/reference_pricers.hpp"

using namespace ero;

namespace {

BlackScholesSpec put_model(double sigma) {
    BlackScholesSpec spec;
    spec.rate = 0.05;
    spec.covariance = Eigen::MatrixXd::Constant(1, 1, sigma * sigma);
    spec.spot = {100.0};
    return spec;
}

}  // namespace

TEST_CASE("closed-form European put") {
    CHECK(black_scholes_european_put(0.3, 0.05, 100.0, 100.0, 1.0) == doctest::Approx(9.354197236057232).epsilon(1e-12));
    CHECK(black_scholes_european_put(0.3, 0.05, 1e-8, 100.0, 1.0) == doctest::Approx(0.0));
    const double deep = black_scholes_european_put(0.3, 0.05, 1e6, 100.0, 1.0);
    CHECK(deep == doctest::Approx(1e6 * std::exp(-0.05) - 100.0).epsilon(1e-12));
    // Put-call parity with a dividend yield.
    const double put = black_scholes_european_put(0.2, 0.03, 110.0, 100.0, 2.0, 0.01);
    CHECK(put > 0.0);
    const double forward_gap = 110.0 * std::exp(-0.06) - 100.0 * std::exp(-0.02);
    CHECK(put >= forward_gap);
}

TEST_CASE("tree with zero volatility follows the deterministic path") {
    TreeConfig config;
    config.sigma = 0.0;
    config.spot = 90.0;
    config.levels = 100;
    CHECK(binomial_tree_american(config) == doctest::Approx(10.0).epsilon(1e-12));
    config.spot = 120.0;
    CHECK(binomial_tree_american(config) == 0.0);
}

TEST_CASE("American tree dominates European and converges") {
    TreeConfig config;
    config.levels = 1000;
    const double am1000 = binomial_tree_american(config);
    const double eu1000 = binomial_tree_european(config);
    CHECK(am1000 >= eu1000);
    CHECK(eu1000 == doctest::Approx(9.354197236057232).epsilon(5e-4));

    config.levels = 2000;
    const double am2000 = binomial_tree_american(config);
    config.levels = 4000;
    const double am4000 = binomial_tree_american(config);
    CHECK(std::abs(am4000 - am2000) < std::abs(am2000 - am1000));

    config.levels = 5000;
    CHECK(binomial_tree_american(config) == doctest::Approx(9.8701).epsilon(2e-4));
}

TEST_CASE("call without dividends has no early exercise premium") {
    TreeConfig config;
    config.kind = OptionKind::Call;
    config.levels = 500;
    CHECK(binomial_tree_american(config) == doctest::Approx(binomial_tree_european(config)).epsilon(1e-12));
    config.dividend = 0.08;
    CHECK(binomial_tree_american(config) > binomial_tree_european(config));
}

TEST_CASE("tree rejects lattices without a risk-neutral probability") {
    TreeConfig config;
    config.levels = 2;
    config.rate = 2.0;
    config.sigma = 0.05;
    CHECK_THROWS_AS(binomial_tree_american(config), std::invalid_argument);
    config = TreeConfig{};
    config.levels = 0;
    CHECK_THROWS_AS(binomial_tree_american(config), std::invalid_argument);
}

TEST_CASE("European Monte Carlo") {
    const auto grid = make_time_grid(1.0, 4);
    const auto flat = simulate_black_scholes(put_model(0.0), grid, 100, 1);
    const auto flat_est = european_mc(discounted_payoff_grid(flat, Put{120.0}, 0.05));
    CHECK(flat_est.mean == doctest::Approx(std::exp(-0.05) * (120.0 - 100.0 * std::exp(0.05))).epsilon(1e-12));
    CHECK(flat_est.std_error == doctest::Approx(0.0));

    const auto batch = simulate_black_scholes(put_model(0.3), grid, 200000, 2);
    const auto est = european_mc(discounted_payoff_grid(batch, Put{100.0}, 0.05));
    CHECK(std::abs(est.mean - 9.354197236057232) < 3.0 * est.std_error);
}

TEST_CASE("Longstaff-Schwartz with one step is the European price") {
    const auto grid = make_time_grid(1.0, 1);
    const auto plan = train_test_split(20000, 4);
    const auto train = simulate_black_scholes(put_model(0.3), grid, plan.train.paths, plan.train.seed);
    const auto test = simulate_black_scholes(put_model(0.3), grid, plan.test.paths, plan.test.seed);
    const auto train_payoffs = discounted_payoff_grid(train, Put{100.0}, 0.05);
    const auto test_payoffs = discounted_payoff_grid(test, Put{100.0}, 0.05);
    const auto ls = longstaff_schwartz(train, train_payoffs, test, test_payoffs, 2);
    CHECK_FALSE(ls.exercise_at_start);
    CHECK(ls.test.mean == doctest::Approx(european_mc(test_payoffs).mean).epsilon(1e-12));
}

TEST_CASE("Longstaff-Schwartz lies between the European and American prices") {
    const auto grid = make_time_grid(1.0, 32);
    const auto plan = train_test_split(200000, 5);
    const auto train = simulate_black_scholes(put_model(0.3), grid, plan.train.paths, plan.train.seed);
    const auto test = simulate_black_scholes(put_model(0.3), grid, plan.test.paths, plan.test.seed);
    const auto train_payoffs = discounted_payoff_grid(train, Put{100.0}, 0.05);
    const auto test_payoffs = discounted_payoff_grid(test, Put{100.0}, 0.05);
    const auto ls = longstaff_schwartz(train, train_payoffs, test, test_payoffs, 3);
    TreeConfig tree;
    tree.levels = 5000;
    const double american = binomial_tree_american(tree);
    CHECK(ls.test.mean <= american + 3.0 * ls.test.std_error);
    CHECK(ls.test.mean >= european_mc(test_payoffs).mean);
    CHECK(ls.test.mean > 9.6);
    CHECK(ls.skipped_steps == 0);
    CHECK(ls.rules.size() == 31);
}

TEST_CASE("Longstaff-Schwartz skips steps with too few in-the-money paths") {
    const auto grid = make_time_grid(1.0, 4);
    const auto train = simulate_black_scholes(put_model(0.3), grid, 20, 6);
    const auto test = simulate_black_scholes(put_model(0.3), grid, 20, 7);
    const auto train_payoffs = discounted_payoff_grid(train, Put{60.0}, 0.05);
    const auto test_payoffs = discounted_payoff_grid(test, Put{60.0}, 0.05);
    const auto ls = longstaff_schwartz(train, train_payoffs, test, test_payoffs, 2);
    CHECK(ls.skipped_steps == 3);
    CHECK(ls.rules.empty());
    CHECK(ls.test.mean == doctest::Approx(european_mc(test_payoffs).mean));
}
