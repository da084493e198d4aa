#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ero/market_models.hpp"
#include "ero/payoffs.hpp"
#include "ero/rate_basis.hpp"
#include "ero/rng.hpp"
#include "ero/statistics.hpp"

namespace ero {

/// The rate polynomial is clamped to [-30, 30] before exponentiation.
inline constexpr double kRateExponentClamp = 30.0;

/// Exercise mass on each interval [t_n, t_{n+1}) plus survival to expiry (last entry).
struct SurvivalWeights {
    std::vector<double> weights;
};

struct ValueGradient {
    Estimate value;
    Eigen::VectorXd gradient;
};

/// lambda_n = 1{g > 0} exp(clamp(c . phi(t_n, S_n))) for n = 0..N-1 (left endpoints).
std::vector<double> rate_path(const Eigen::VectorXd& coeffs, const BasisTransform& transform,
                              const PathBatch& batch, std::size_t path,
                              std::span<const std::uint8_t> in_the_money);

/// U_0 = 1, U_{n+1} = U_n e^{-lambda_n dt}; w_n = U_n (1 - e^{-lambda_n dt}) via expm1, w_N = U_N.
SurvivalWeights survival_weights(std::span<const double> rates, double dt);

/// Conditional expected discounted payoff of one path under the randomized strategy.
double phi(const Eigen::VectorXd& coeffs, const BasisTransform& transform, const PathBatch& batch,
           std::size_t path, const PayoffGrid& payoffs);

/// Exercise index of the exponential-clock strategy: the first interval whose
/// cumulative hazard reaches an Exp(1) draw, or N if none does.
int sample_exercise_time(std::span<const double> rates, double dt, PathEngine& engine);

/// Standardized state variables of every (path, node), cached once per basis
/// and batch so that objective evaluations skip the log transforms.
class StandardizedCloud {
public:
    StandardizedCloud(const BasisTransform& transform, const PathBatch& batch);
    /// Standardizes in place, reusing the storage of `batch`.
    StandardizedCloud(const BasisTransform& transform, PathBatch&& batch);

    std::size_t path_count() const { return paths_; }
    int steps() const { return steps_; }
    double dt() const { return dt_; }
    int variables() const { return variables_; }

    /// Standardized time of node n (0 when the basis has no time variable).
    double time(int node) const { return time_[static_cast<std::size_t>(node)]; }
    std::span<const double> spatial(std::size_t path, int node) const {
        return {values_.data() + (path * nodes() + static_cast<std::size_t>(node)) * spatial_dim_, spatial_dim_};
    }

private:
    std::size_t nodes() const { return static_cast<std::size_t>(steps_) + 1; }
    void init_times(const BasisTransform& transform, const PathBatch& batch);

    std::size_t paths_;
    int steps_;
    double dt_;
    int variables_;
    std::size_t spatial_dim_;
    std::vector<double> time_;
    std::vector<double> values_;
};

/// Empirical objective psi_bar(c) = (1/M) sum_m phi_m and its analytic gradient.
///
/// Paths are reduced in fixed blocks combined in block order, so results are
/// bit-identical for any worker count.
class ExerciseRateObjective {
public:
    ExerciseRateObjective(const BasisTransform& transform, const StandardizedCloud& cloud,
                          const PayoffGrid& payoffs);

    int dimension() const { return transform_->size(); }
    Estimate value(const Eigen::VectorXd& coeffs) const;
    ValueGradient value_gradient(const Eigen::VectorXd& coeffs) const;

private:
    template <bool WithGradient>
    ValueGradient evaluate(const Eigen::VectorXd& coeffs) const;

    const BasisTransform* transform_;
    const StandardizedCloud* cloud_;
    const PayoffGrid* payoffs_;
};

Estimate objective(const Eigen::VectorXd& coeffs, const BasisTransform& transform, const PathBatch& batch,
                   const PayoffGrid& payoffs);

ValueGradient objective_gradient(const Eigen::VectorXd& coeffs, const BasisTransform& transform,
                                 const PathBatch& batch, const PayoffGrid& payoffs);

}  // namespace ero
