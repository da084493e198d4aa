#include "ero/market_models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ero/linalg.hpp"
#include "ero/parallel.hpp"
#include "ero/rng.hpp"

namespace ero {

namespace {

constexpr std::size_t kPathBlock = 256;

void require(bool condition, const std::string& message) {
    if (!condition) throw std::invalid_argument(message);
}

bool all_finite_positive(const std::vector<double>& values) {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v) && v > 0.0; });
}

void check_correlation(const Eigen::MatrixXd& corr, Eigen::Index size) {
    require(corr.rows() == size && corr.cols() == size,
            "heston: correlation matrix must be (assets + 1) x (assets + 1)");
    require(corr.allFinite(), "heston: correlation matrix has non-finite entries");
    require(corr.isApprox(corr.transpose(), 1e-12), "heston: correlation matrix is not symmetric");
    for (Eigen::Index i = 0; i < size; ++i) {
        require(std::abs(corr(i, i) - 1.0) < 1e-12, "heston: correlation diagonal must be 1");
    }
}

std::vector<std::string> validate(const BlackScholesSpec& s) {
    const auto d = static_cast<Eigen::Index>(s.spot.size());
    require(d >= 1, "black_scholes: at least one asset required");
    require(all_finite_positive(s.spot), "black_scholes: spot prices must be positive");
    require(std::isfinite(s.rate) && std::isfinite(s.dividend), "black_scholes: rates must be finite");
    require(s.covariance.rows() == d && s.covariance.cols() == d,
            "black_scholes: covariance must be d x d");
    require(s.covariance.allFinite(), "black_scholes: covariance has non-finite entries");
    require(s.covariance.isApprox(s.covariance.transpose(), 1e-12) || s.covariance.isZero(),
            "black_scholes: covariance is not symmetric");
    return {};
}

std::vector<std::string> validate(const HestonSpec& s) {
    const auto d = static_cast<Eigen::Index>(s.spot.size());
    require(d >= 1, "heston: at least one asset required");
    require(all_finite_positive(s.spot), "heston: spot prices must be positive");
    require(std::isfinite(s.v0) && s.v0 > 0.0, "heston: v0 must be positive");
    require(std::isfinite(s.rate), "heston: rate must be finite");
    require(s.kappa > 0.0 && s.theta > 0.0 && s.xi >= 0.0 && std::isfinite(s.kappa) &&
                std::isfinite(s.theta) && std::isfinite(s.xi),
            "heston: kappa, theta must be positive and xi non-negative");
    check_correlation(s.correlation, d + 1);
    std::vector<std::string> warnings;
    if (!(2.0 * s.kappa * s.theta > s.xi * s.xi)) {
        std::ostringstream msg;
        msg << "heston: Feller condition violated (2 kappa theta = " << 2.0 * s.kappa * s.theta
            << " <= xi^2 = " << s.xi * s.xi << ")";
        warnings.push_back(msg.str());
    }
    return warnings;
}

std::vector<std::string> validate(const RoughBergomiSpec& s) {
    require(s.hurst > 0.0 && s.hurst <= 1.0, "rough_bergomi: Hurst index must lie in (0, 1]");
    require(std::isfinite(s.eta), "rough_bergomi: eta must be finite");
    require(s.rho >= -1.0 && s.rho <= 1.0, "rough_bergomi: rho must lie in [-1, 1]");
    require(std::isfinite(s.rate), "rough_bergomi: rate must be finite");
    require(std::isfinite(s.spot) && s.spot > 0.0, "rough_bergomi: spot must be positive");
    require(std::isfinite(s.v0) && s.v0 > 0.0, "rough_bergomi: v0 must be positive");
    return {};
}

template <class Fill>
void fill_paths(PathBatch& batch, Fill&& fill) {
    const std::size_t paths = batch.path_count();
    for_each_block(paths, kPathBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            PathEngine engine = path_engine(batch.seed(), m);
            fill(m, engine);
        }
    });
}

}  // namespace

std::vector<std::string> validate_model(const ModelSpec& spec) {
    return std::visit([](const auto& s) { return validate(s); }, spec);
}

double risk_free_rate(const ModelSpec& spec) {
    return std::visit([](const auto& s) { return s.rate; }, spec);
}

int asset_count(const ModelSpec& spec) {
    struct Visitor {
        int operator()(const BlackScholesSpec& s) const { return static_cast<int>(s.spot.size()); }
        int operator()(const HestonSpec& s) const { return static_cast<int>(s.spot.size()); }
        int operator()(const RoughBergomiSpec&) const { return 1; }
    };
    return std::visit(Visitor{}, spec);
}

std::vector<double> initial_state(const ModelSpec& spec) {
    struct Visitor {
        std::vector<double> operator()(const BlackScholesSpec& s) const { return s.spot; }
        std::vector<double> operator()(const HestonSpec& s) const {
            auto out = s.spot;
            out.push_back(s.v0);
            return out;
        }
        std::vector<double> operator()(const RoughBergomiSpec& s) const { return {s.spot, s.v0}; }
    };
    return std::visit(Visitor{}, spec);
}

std::string model_name(const ModelSpec& spec) {
    struct Visitor {
        std::string operator()(const BlackScholesSpec&) const { return "black_scholes"; }
        std::string operator()(const HestonSpec&) const { return "heston"; }
        std::string operator()(const RoughBergomiSpec&) const { return "rough_bergomi"; }
    };
    return std::visit(Visitor{}, spec);
}

PathBatch::PathBatch(TimeGrid grid, std::size_t paths, std::vector<CoordinateKind> kinds,
                     int assets, std::uint64_t seed)
    : grid_(grid), paths_(paths), kinds_(std::move(kinds)), assets_(assets), seed_(seed) {
    if (paths_ == 0) throw std::invalid_argument("path batch: path count must be positive");
    if (assets_ < 1 || assets_ > static_cast<int>(kinds_.size())) {
        throw std::invalid_argument("path batch: asset count out of range");
    }
    data_.assign(paths_ * path_stride(), 0.0);
}

PathBatch simulate_black_scholes(const BlackScholesSpec& spec, const TimeGrid& grid,
                                 std::size_t paths, std::uint64_t seed) {
    validate(spec);
    const int d = static_cast<int>(spec.spot.size());
    const Eigen::MatrixXd chol = cholesky_lower(spec.covariance);
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    Eigen::VectorXd drift(d);
    Eigen::VectorXd log_spot(d);
    for (int i = 0; i < d; ++i) {
        drift(i) = (spec.rate - spec.dividend - 0.5 * spec.covariance(i, i)) * dt;
        log_spot(i) = std::log(spec.spot[static_cast<std::size_t>(i)]);
    }

    PathBatch batch(grid, paths, std::vector<CoordinateKind>(static_cast<std::size_t>(d),
                                                             CoordinateKind::Asset),
                    d, seed);
    fill_paths(batch, [&](std::size_t m, PathEngine& engine) {
        std::normal_distribution<double> normal;
        Eigen::VectorXd z(d);
        Eigen::VectorXd x = log_spot;
        auto s0 = batch.state(m, 0);
        for (int i = 0; i < d; ++i) s0[static_cast<std::size_t>(i)] = spec.spot[static_cast<std::size_t>(i)];
        for (int n = 1; n <= grid.steps; ++n) {
            for (int i = 0; i < d; ++i) z(i) = normal(engine);
            x += drift + sqrt_dt * (chol * z);
            auto s = batch.state(m, n);
            for (int i = 0; i < d; ++i) s[static_cast<std::size_t>(i)] = std::exp(x(i));
        }
    });
    return batch;
}

PathBatch simulate_heston(const HestonSpec& spec, const TimeGrid& grid, std::size_t paths,
                          std::uint64_t seed) {
    const auto warnings = validate(spec);
    const int d = static_cast<int>(spec.spot.size());
    const Eigen::MatrixXd chol = cholesky_lower(spec.correlation);
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);

    std::vector<CoordinateKind> kinds(static_cast<std::size_t>(d), CoordinateKind::Asset);
    kinds.push_back(CoordinateKind::Variance);
    PathBatch batch(grid, paths, std::move(kinds), d, seed);
    for (const auto& w : warnings) batch.add_diagnostic(w);

    fill_paths(batch, [&](std::size_t m, PathEngine& engine) {
        std::normal_distribution<double> normal;
        Eigen::VectorXd z(d + 1);
        Eigen::VectorXd x(d);
        for (int i = 0; i < d; ++i) x(i) = std::log(spec.spot[static_cast<std::size_t>(i)]);
        double v = spec.v0;
        auto s0 = batch.state(m, 0);
        for (int i = 0; i < d; ++i) s0[static_cast<std::size_t>(i)] = spec.spot[static_cast<std::size_t>(i)];
        s0[static_cast<std::size_t>(d)] = spec.v0;
        for (int n = 1; n <= grid.steps; ++n) {
            for (int i = 0; i <= d; ++i) z(i) = normal(engine);
            const Eigen::VectorXd dw = sqrt_dt * (chol * z);
            const double v_plus = std::max(v, 0.0);
            const double vol = std::sqrt(v_plus);
            for (int i = 0; i < d; ++i) x(i) += (spec.rate - 0.5 * v_plus) * dt + vol * dw(i);
            v += spec.kappa * (spec.theta - v_plus) * dt + spec.xi * vol * dw(d);
            auto s = batch.state(m, n);
            for (int i = 0; i < d; ++i) s[static_cast<std::size_t>(i)] = std::exp(x(i));
            s[static_cast<std::size_t>(d)] = std::max(v, 0.0);
        }
    });
    return batch;
}

double volterra_covariance(double t, double s, double hurst) {
    if (t < 0.0 || s < 0.0) throw std::invalid_argument("volterra_covariance: negative time");
    if (!(hurst > 0.0 && hurst <= 1.0)) {
        throw std::invalid_argument("volterra_covariance: Hurst index must lie in (0, 1]");
    }
    const double lo = std::min(t, s);
    const double hi = std::max(t, s);
    if (lo == 0.0) return 0.0;
    if (lo == hi) return std::pow(lo, 2.0 * hurst);
    if (hurst == 0.5) return lo;

    // With v = lo - u the integrand is (v (v + gap))^{H-1/2}: singular at
    // v = 0 and nearly singular at v = -gap, so split at v = gap.
    const double gap = hi - lo;
    const double exponent = hurst - 0.5;
    auto integrand = [&](double v) { return std::pow(v * (v + gap), exponent); };
    static thread_local boost::math::quadrature::tanh_sinh<double> quadrature;
    const double knee = std::min(lo, gap);
    double total = 0.0;
    double error_total = 0.0;
    for (auto [a, b] : {std::pair{0.0, knee}, std::pair{knee, lo}}) {
        if (b <= a) continue;
        double error = 0.0;
        total += quadrature.integrate(integrand, a, b, 1e-14, &error);
        error_total += error;
    }
    if (error_total > 1e-10 * std::abs(total)) {
        throw std::runtime_error("volterra_covariance: quadrature did not reach tolerance");
    }
    return 2.0 * hurst * total;
}

double volterra_brownian_covariance(double t, double s, double hurst) {
    if (t < 0.0 || s < 0.0) throw std::invalid_argument("volterra_brownian_covariance: negative time");
    const double alpha = hurst + 0.5;
    const double lo = std::min(s, t);
    return std::sqrt(2.0 * hurst) / alpha * (std::pow(t, alpha) - std::pow(t - lo, alpha));
}

Eigen::MatrixXd rough_bergomi_joint_covariance(const TimeGrid& grid, double hurst) {
    const int n_steps = grid.steps;
    Eigen::MatrixXd cov(2 * n_steps, 2 * n_steps);
    for (int i = 0; i < n_steps; ++i) {
        const double ti = grid.node(i + 1);
        for (int j = 0; j <= i; ++j) {
            const double tj = grid.node(j + 1);
            const double ww = std::min(ti, tj);
            const double vv = volterra_covariance(ti, tj, hurst);
            cov(i, j) = cov(j, i) = ww;
            cov(n_steps + i, n_steps + j) = cov(n_steps + j, n_steps + i) = vv;
        }
        for (int j = 0; j < n_steps; ++j) {
            // row: V at t_i, column: W at t_j
            const double vw = volterra_brownian_covariance(ti, grid.node(j + 1), hurst);
            cov(n_steps + i, j) = cov(j, n_steps + i) = vw;
        }
    }
    return cov;
}

PathBatch simulate_rough_bergomi(const RoughBergomiSpec& spec, const TimeGrid& grid,
                                 std::size_t paths, std::uint64_t seed) {
    validate(spec);
    const int n_steps = grid.steps;
    const Eigen::MatrixXd cov = rough_bergomi_joint_covariance(grid, spec.hurst);
    const JitteredFactor factor = cholesky_with_jitter(cov, 1e-12, 1e-12, 0.0);
    const Eigen::MatrixXd& chol = factor.lower;

    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    const double rho_perp = std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho));
    std::vector<double> compensator(static_cast<std::size_t>(n_steps) + 1);
    for (int n = 0; n <= n_steps; ++n) {
        compensator[static_cast<std::size_t>(n)] =
            0.5 * spec.eta * spec.eta * std::pow(grid.node(n), 2.0 * spec.hurst);
    }

    PathBatch batch(grid, paths, {CoordinateKind::Asset, CoordinateKind::Variance}, 1, seed);
    if (factor.jitter > 0.0) {
        std::ostringstream msg;
        msg << "rough_bergomi: joint covariance factorized with diagonal jitter " << factor.jitter;
        batch.add_diagnostic(msg.str());
    }

    fill_paths(batch, [&](std::size_t m, PathEngine& engine) {
        std::normal_distribution<double> normal;
        Eigen::VectorXd z(2 * n_steps);
        for (int i = 0; i < 2 * n_steps; ++i) z(i) = normal(engine);
        const Eigen::VectorXd g = chol.triangularView<Eigen::Lower>() * z;

        double log_x = std::log(spec.spot);
        double v = spec.v0;
        double w_prev = 0.0;
        auto s0 = batch.state(m, 0);
        s0[0] = spec.spot;
        s0[1] = spec.v0;
        for (int n = 0; n < n_steps; ++n) {
            const double dw_v = g(n) - w_prev;
            w_prev = g(n);
            const double dw_x = spec.rho * dw_v + rho_perp * sqrt_dt * normal(engine);
            log_x += (spec.rate - 0.5 * v) * dt + std::sqrt(v) * dw_x;
            v = spec.v0 * std::exp(spec.eta * g(n_steps + n) -
                                   compensator[static_cast<std::size_t>(n) + 1]);
            auto s = batch.state(m, n + 1);
            s[0] = std::exp(log_x);
            s[1] = v;
        }
    });
    return batch;
}

PathBatch simulate(const ModelSpec& spec, const TimeGrid& grid, std::size_t paths,
                   std::uint64_t seed) {
    struct Visitor {
        const TimeGrid& grid;
        std::size_t paths;
        std::uint64_t seed;
        PathBatch operator()(const BlackScholesSpec& s) const {
            return simulate_black_scholes(s, grid, paths, seed);
        }
        PathBatch operator()(const HestonSpec& s) const { return simulate_heston(s, grid, paths, seed); }
        PathBatch operator()(const RoughBergomiSpec& s) const {
            return simulate_rough_bergomi(s, grid, paths, seed);
        }
    };
    return std::visit(Visitor{grid, paths, seed}, spec);
}

std::vector<int> snap_lags(const LagSpec& lags, const TimeGrid& grid) {
    std::vector<int> steps;
    steps.reserve(lags.lags.size());
    for (double lag : lags.lags) {
        if (!(lag > 0.0) || !std::isfinite(lag)) throw std::invalid_argument("lags: each lag must be positive");
        if (lag > grid.expiry * (1.0 + 1e-12)) throw std::invalid_argument("lags: lag exceeds expiry");
        const int snapped = static_cast<int>(std::lround(lag / grid.dt()));
        if (snapped < 1) throw std::invalid_argument("lags: lag shorter than half a time step");
        if (!steps.empty() && snapped <= steps.back()) {
            throw std::invalid_argument("lags: lags must be strictly increasing on the grid");
        }
        steps.push_back(snapped);
    }
    return steps;
}

PathBatch extend_with_lags(const PathBatch& batch, const LagSpec& lags) {
    const std::vector<int> steps = snap_lags(lags, batch.grid());
    const int d = batch.dimension();
    const std::size_t blocks = steps.size() + 1;

    std::vector<CoordinateKind> kinds;
    kinds.reserve(blocks * static_cast<std::size_t>(d));
    for (std::size_t j = 0; j < blocks; ++j) kinds.insert(kinds.end(), batch.kinds().begin(), batch.kinds().end());

    PathBatch out(batch.grid(), batch.path_count(), std::move(kinds), batch.asset_count(), batch.seed());
    for (const auto& msg : batch.diagnostics()) out.add_diagnostic(msg);
    const int nodes = batch.grid().node_count();
    for_each_block(batch.path_count(), kPathBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            for (int n = 0; n < nodes; ++n) {
                auto dst = out.state(m, n);
                for (std::size_t j = 0; j < blocks; ++j) {
                    const int source = j == 0 ? n : std::max(n - steps[j - 1], 0);
                    const auto src = batch.state(m, source);
                    std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(j) * d);
                }
            }
        }
    });
    return out;
}

}  // namespace ero
