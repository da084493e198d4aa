#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ero/time_grid.hpp"

namespace ero {

/// Multi-asset geometric Brownian motion with a continuous dividend yield.
struct BlackScholesSpec {
    double rate = 0.0;
    double dividend = 0.0;
    Eigen::MatrixXd covariance;  ///< annualized log-return covariance, d x d
    std::vector<double> spot;
};

/// Heston assets sharing one CIR variance process.
///
/// `correlation` is the correlation matrix of (W^1, ..., W^d, W^v): the asset
/// drivers first, the variance driver last.
struct HestonSpec {
    double rate = 0.0;
    double kappa = 0.0;
    double theta = 0.0;
    double xi = 0.0;
    Eigen::MatrixXd correlation;
    std::vector<double> spot;
    double v0 = 0.0;
};

/// Rough Bergomi: variance is a Wick exponential of a Volterra Gaussian.
struct RoughBergomiSpec {
    double hurst = 0.07;
    double eta = 1.9;
    double rho = -0.9;
    double rate = 0.05;
    double spot = 100.0;
    double v0 = 0.09;
};

using ModelSpec = std::variant<BlackScholesSpec, HestonSpec, RoughBergomiSpec>;

/// Checks parameter invariants; throws std::invalid_argument on violation.
/// Returns non-fatal warnings (e.g. a violated Feller condition).
std::vector<std::string> validate_model(const ModelSpec& spec);

double risk_free_rate(const ModelSpec& spec);
int asset_count(const ModelSpec& spec);
std::vector<double> initial_state(const ModelSpec& spec);
std::string model_name(const ModelSpec& spec);

/// How a state coordinate enters the exercise-rate polynomial.
enum class CoordinateKind { Asset, Variance };

/// M sampled state paths on a time grid. Spot asset coordinates come first.
class PathBatch {
public:
    PathBatch(TimeGrid grid, std::size_t paths, std::vector<CoordinateKind> kinds, int assets,
              std::uint64_t seed);

    const TimeGrid& grid() const { return grid_; }
    std::size_t path_count() const { return paths_; }
    int dimension() const { return static_cast<int>(kinds_.size()); }
    int asset_count() const { return assets_; }
    const std::vector<CoordinateKind>& kinds() const { return kinds_; }
    std::uint64_t seed() const { return seed_; }

    std::span<const double> state(std::size_t path, int node) const {
        return {data_.data() + offset(path, node), kinds_.size()};
    }
    std::span<double> state(std::size_t path, int node) {
        return {data_.data() + offset(path, node), kinds_.size()};
    }
    /// All (N+1) x d values of one path, node-major.
    std::span<const double> path(std::size_t path) const {
        return {data_.data() + offset(path, 0), path_stride()};
    }

    /// Messages recorded while sampling (Feller warning, covariance jitter).
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }
    void add_diagnostic(std::string message) { diagnostics_.push_back(std::move(message)); }

    /// Moves out the path-major (path, node, coordinate) storage, leaving the batch empty.
    std::vector<double> take_values() && { return std::move(data_); }

private:
    std::size_t path_stride() const {
        return static_cast<std::size_t>(grid_.node_count()) * kinds_.size();
    }
    std::size_t offset(std::size_t path, int node) const {
        return path * path_stride() + static_cast<std::size_t>(node) * kinds_.size();
    }

    TimeGrid grid_;
    std::size_t paths_;
    std::vector<CoordinateKind> kinds_;
    int assets_;
    std::uint64_t seed_;
    std::vector<double> data_;
    std::vector<std::string> diagnostics_;
};

PathBatch simulate_black_scholes(const BlackScholesSpec& spec, const TimeGrid& grid,
                                 std::size_t paths, std::uint64_t seed);

/// Full-truncation Euler for the variance, log-Euler for the assets.
PathBatch simulate_heston(const HestonSpec& spec, const TimeGrid& grid, std::size_t paths,
                          std::uint64_t seed);

/// Exact joint sampling of the variance driver and the Volterra process at the
/// grid nodes via one Cholesky factorization; log-Euler for the asset.
PathBatch simulate_rough_bergomi(const RoughBergomiSpec& spec, const TimeGrid& grid,
                                 std::size_t paths, std::uint64_t seed);

PathBatch simulate(const ModelSpec& spec, const TimeGrid& grid, std::size_t paths,
                   std::uint64_t seed);

/// Cov(V_t, V_s) of V_t = sqrt(2H) int_0^t (t-u)^{H-1/2} dW_u.
double volterra_covariance(double t, double s, double hurst);

/// Cov(V_t, W_s) for the same Volterra process and its driving Brownian motion.
double volterra_brownian_covariance(double t, double s, double hurst);

/// 2N x 2N covariance of (W_{t_1..t_N}, V_{t_1..t_N}).
Eigen::MatrixXd rough_bergomi_joint_covariance(const TimeGrid& grid, double hurst);

/// Past-value lags 0 < lag_1 < ... < lag_J, in years.
struct LagSpec {
    std::vector<double> lags;
};

/// Lags as whole grid steps; throws on non-positive, too large or colliding lags.
std::vector<int> snap_lags(const LagSpec& lags, const TimeGrid& grid);

/// Appends (S_{t - lag_1}, ..., S_{t - lag_J}) to every state, with S_t = S_0 for t < 0.
PathBatch extend_with_lags(const PathBatch& batch, const LagSpec& lags);

}  // namespace ero
