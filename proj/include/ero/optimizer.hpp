#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ero/statistics.hpp"

namespace ero {

struct OptimizerConfig {
    int memory = 10;             ///< stored curvature pairs
    int max_iters = 20;          ///< accepted iterations
    double grad_tol = 1e-8;      ///< on the sup-norm of the gradient
    double c1 = 1e-4;            ///< sufficient increase
    double c2 = 0.9;             ///< curvature
    int test_every = 1;          ///< iterations between test evaluations
    bool early_stop = true;      ///< stop once the test value decreases
    int max_line_search = 20;    ///< trial steps per line search
};

/// Throws std::invalid_argument unless 0 < c1 < c2 < 1, memory >= 1, etc.
void validate_optimizer_config(const OptimizerConfig& config);

enum class StopReason { MaxIters, GradTol, TestDecrease, LineSearchFailure };

std::string to_string(StopReason reason);
std::optional<StopReason> parse_stop_reason(const std::string& text);

struct IterationRecord {
    int iteration = 0;
    double train_value = 0.0;
    std::optional<Estimate> test;
    double grad_norm = 0.0;  ///< sup-norm
    double step = 0.0;
    int evaluations = 0;     ///< cumulative objective/gradient evaluations
};

struct OptimReport {
    std::vector<IterationRecord> history;   ///< iteration 0 is the starting point c = 0
    Eigen::VectorXd coefficients;
    int selected_iteration = 0;
    StopReason stop_reason = StopReason::MaxIters;
    int iterations = 0;                     ///< accepted iterations
    int evaluations = 0;

    const IterationRecord& selected() const;
};

using ValueGradientFn = std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;
using TestFn = std::function<Estimate(const Eigen::VectorXd&)>;

/// Limited-memory BFGS ascent from c = 0 with a strong-Wolfe line search.
///
/// `test` may be empty; when present it is evaluated at c = 0 and every
/// `test_every` accepted iterations. With early stopping the returned
/// coefficients are those with the best test value seen, otherwise the last
/// iterate.
OptimReport maximize(const ValueGradientFn& value_gradient, const TestFn& test, int dimension,
                     const OptimizerConfig& config);

struct BatchPlan {
    std::size_t paths = 0;
    std::uint64_t seed = 0;
};

struct TrainTestPlan {
    BatchPlan train;
    BatchPlan test;
};

/// Splits M paths in half; the halves use distinct seeds derived from `seed`.
/// Throws std::invalid_argument for odd or zero M.
TrainTestPlan train_test_split(std::size_t total_paths, std::uint64_t seed);

/// Train/test plan with explicit (possibly unequal) sizes.
TrainTestPlan train_test_plan(std::size_t train_paths, std::size_t test_paths, std::uint64_t seed);

}  // namespace ero
