#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "ero/market_models.hpp"
#include "ero/rate_basis.hpp"

using namespace ero;

namespace {

PathBatch bs_batch(int assets, std::size_t paths, int steps, std::uint64_t seed) {
    BlackScholesSpec spec;
    spec.rate = 0.05;
    spec.covariance = 0.09 * Eigen::MatrixXd::Identity(assets, assets);
    spec.spot.assign(static_cast<std::size_t>(assets), 100.0);
    return simulate_black_scholes(spec, make_time_grid(1.0, steps), paths, seed);
}

long long binomial(int n, int k) {
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST_CASE("basis dimension is C(d + 1 + k, k)") {
    CHECK(basis_dimension(2, 1) == 6);
    CHECK(basis_dimension(2, 11) == 91);
    CHECK(basis_dimension(0, 5) == 1);
    CHECK(basis_dimension(6, 5) == 924);
    for (int d = 0; d <= 10; ++d) {
        for (int k = 0; k <= 6; ++k) CHECK(basis_dimension(k, d) == binomial(d + 1 + k, k));
    }
    CHECK_THROWS_AS(basis_dimension(-1, 2), std::invalid_argument);
}

TEST_CASE("exponent table enumerates every monomial once in graded order") {
    for (int k = 0; k <= 4; ++k) {
        BasisTransform basis(BasisSpec{k, 3, true}, std::vector<CoordinateKind>(3, CoordinateKind::Asset));
        const auto table = basis.exponent_table();
        REQUIRE(static_cast<int>(table.size()) == basis_dimension(k, 3));
        std::set<std::vector<int>> seen(table.begin(), table.end());
        CHECK(seen.size() == table.size());
        int previous = 0;
        for (const auto& row : table) {
            const int degree = std::accumulate(row.begin(), row.end(), 0);
            CHECK(degree <= k);
            CHECK(degree >= previous);
            previous = degree;
        }
        CHECK(std::accumulate(table.front().begin(), table.front().end(), 0) == 0);
    }
}

TEST_CASE("monomials match the exponent table") {
    BasisTransform basis(BasisSpec{3, 2, true}, {CoordinateKind::Asset, CoordinateKind::Variance});
    const std::vector<double> z = {0.3, -1.2, 2.0};
    std::vector<double> m(static_cast<std::size_t>(basis.size()));
    basis.monomials(z, m);
    const auto table = basis.exponent_table();
    for (std::size_t b = 0; b < table.size(); ++b) {
        double expected = 1.0;
        for (std::size_t v = 0; v < 3; ++v) expected *= std::pow(z[v], table[b][v]);
        CHECK(m[b] == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("fitted basis is orthonormal on its fitting cloud") {
    for (int assets : {1, 2}) {
        for (int k : {1, 2, 3}) {
            const auto batch = bs_batch(assets, 4000, 8, 17);
            const auto basis = fit_orthonormal_basis(batch, k);
            CHECK(basis.jitter() == 0.0);
            const Eigen::MatrixXd gram = empirical_gram(basis, batch);
            const double err = (gram - Eigen::MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff();
            CHECK(err < 1e-8);
        }
    }
}

TEST_CASE("first feature is the constant one") {
    const auto batch = bs_batch(2, 2000, 4, 5);
    const auto basis = fit_orthonormal_basis(batch, 2);
    const std::vector<double> s = {80.0, 130.0};
    CHECK(basis.evaluate(0.3, s)(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("standardization uses log assets, raw variances and time") {
    HestonSpec spec;
    spec.rate = 0.0;
    spec.kappa = 2.0;
    spec.theta = 0.04;
    spec.xi = 0.3;
    spec.correlation = Eigen::Matrix2d{{1.0, 0.0}, {0.0, 1.0}};
    spec.spot = {100.0};
    spec.v0 = 0.04;
    const auto batch = simulate_heston(spec, make_time_grid(1.0, 4), 3000, 2);
    const auto basis = fit_orthonormal_basis(batch, 1);
    std::vector<double> raw(3);
    const std::vector<double> state = {120.0, 0.05};
    basis.raw_variables(0.25, state, raw);
    CHECK(raw[0] == 0.25);
    CHECK(raw[1] == doctest::Approx(std::log(120.0)));
    CHECK(raw[2] == 0.05);
    std::vector<double> z(3);
    basis.standardize(0.25, state, z);
    for (int j = 0; j < 3; ++j) {
        CHECK(z[static_cast<std::size_t>(j)] ==
              doctest::Approx((raw[static_cast<std::size_t>(j)] - basis.shift()(j)) / basis.scale()(j)));
    }
}

TEST_CASE("monomial coefficients reproduce the feature expansion") {
    const auto batch = bs_batch(2, 3000, 4, 8);
    const auto basis = fit_orthonormal_basis(batch, 2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    Eigen::VectorXd c(basis.size());
    for (int i = 0; i < c.size(); ++i) c(i) = normal(rng);
    const Eigen::VectorXd a = basis.monomial_coefficients(c);
    const std::vector<double> s = {93.0, 104.0};
    std::vector<double> z(3);
    basis.standardize(0.6, s, z);
    Eigen::VectorXd m(basis.size());
    basis.monomials(z, std::span<double>(m.data(), static_cast<std::size_t>(basis.size())));
    CHECK(a.dot(m) == doctest::Approx(c.dot(basis.evaluate(0.6, s))).epsilon(1e-12));

    // Chain rule: d/dc (a(c) . g) = L^{-1} g.
    Eigen::VectorXd g(basis.size());
    for (int i = 0; i < g.size(); ++i) g(i) = normal(rng);
    const Eigen::VectorXd mapped = basis.feature_gradient(g);
    for (int i = 0; i < c.size(); ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(c.size());
        e(i) = 1.0;
        CHECK(mapped(i) == doctest::Approx(basis.monomial_coefficients(e).dot(g)).epsilon(1e-12));
    }
}

TEST_CASE("a constant coordinate does not break the fit") {
    const auto batch = bs_batch(1, 3000, 8, 4);
    const auto lagged = extend_with_lags(batch, LagSpec{{1.0}});  // lagged coordinate is S_0 at most nodes
    const auto basis = fit_orthonormal_basis(lagged, 2);
    CHECK(basis.size() == basis_dimension(2, 2));
    CHECK(std::isfinite(basis.evaluate(0.5, std::vector<double>{95.0, 100.0}).sum()));
}

TEST_CASE("too few sample points are rejected") {
    const auto batch = bs_batch(5, 2, 1, 1);  // 4 points, 28 functions
    CHECK_THROWS_AS(fit_orthonormal_basis(batch, 2), DegenerateSampleError);
}

TEST_CASE("collinear coordinates fall back to jitter or fail cleanly") {
    BlackScholesSpec spec;
    spec.rate = 0.0;
    spec.covariance = Eigen::Matrix2d{{0.09, 0.09}, {0.09, 0.09}};  // identical assets
    spec.spot = {100.0, 100.0};
    const auto batch = simulate_black_scholes(spec, make_time_grid(1.0, 4), 2000, 6);
    try {
        const auto basis = fit_orthonormal_basis(batch, 2);
        CHECK(basis.jitter() > 0.0);
    } catch (const DegenerateSampleError&) {
        CHECK(true);
    }
}

TEST_CASE("spatial basis is orthonormal on the selected paths at one node") {
    const auto batch = bs_batch(2, 5000, 4, 9);
    std::vector<std::size_t> chosen;
    for (std::size_t m = 0; m < batch.path_count(); m += 2) chosen.push_back(m);
    const auto basis = fit_spatial_basis(batch, 2, chosen, 3);
    CHECK(basis.size() == basis_dimension(3, 1));
    CHECK_FALSE(basis.spec().include_time);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.size(), basis.size());
    for (auto m : chosen) {
        const Eigen::VectorXd phi = basis.evaluate(0.5, batch.state(m, 2));
        gram += phi * phi.transpose();
    }
    gram /= static_cast<double>(chosen.size());
    CHECK((gram - Eigen::MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff() < 1e-8);
}
