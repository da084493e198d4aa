#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ero/level_set.hpp"
#include "ero/market_models.hpp"
#include "ero/optimizer.hpp"
#include "ero/payoffs.hpp"
#include "ero/rate_basis.hpp"
#include "ero/results_io.hpp"

namespace ero {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ErrorCategory { Config, Numerical, Io, Other };

/// Failure of one experiment, tagged with its id and a category.
class ExperimentError : public std::runtime_error {
public:
    ExperimentError(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}
    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

enum class ReferenceMethod { Tree, ClosedForm, European, LongstaffSchwartz };

std::string to_string(ReferenceMethod method);

struct SamplingConfig {
    std::size_t train_paths = 51200;
    std::size_t test_paths = 51200;
    std::uint64_t seed = 1;
};

struct LevelSetConfig {
    int axis_x = 0;   ///< state coordinate index, or -1 for time
    int axis_y = 1;
    double t_slice = 0.5;
    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    int nx = 101;
    int ny = 101;
    std::vector<double> pinned;  ///< full state for the other coordinates; empty = initial state
    std::string output;
};

struct ExperimentConfig {
    std::string id = "experiment";
    ModelSpec model;
    PayoffSpec payoff;
    TimeGrid grid;
    SamplingConfig sampling;
    std::optional<int> level;       ///< refinement level n: M = 200 4^n per batch, N = 2^n
    int degree = 2;
    OptimizerConfig optimizer;
    LagSpec lags;
    std::vector<double> strikes;    ///< strike sweep
    std::vector<int> levels;        ///< refinement-level sweep
    std::vector<ReferenceMethod> references;
    int ls_degree = 2;
    int tree_levels = 50000;
    LevelSetConfig levelset;
    std::string output;
};

/// Paths per batch and steps at refinement level n.
std::size_t level_paths(int level);
int level_steps(int level);

/// Builds a config from a JSON document. A string `model` names a preset
/// whose model section is used. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const nlohmann::json& document);

/// Applies `key=value` with a dotted key path; the value is parsed as JSON
/// and taken as a string when that fails.
void apply_override(nlohmann::json& document, const std::string& assignment);

/// Throws ConfigError; returns warnings such as M < B^2 or a Feller violation.
std::vector<std::string> validate_experiment(const ExperimentConfig& config);

/// Copy of `config` with the refinement level applied to paths and steps.
ExperimentConfig at_level(ExperimentConfig config, int level);

struct ExperimentRun {
    ResultRow row;
    OptimReport report;
    std::optional<BasisTransform> basis;
    Eigen::VectorXd coefficients;
};

struct RunOptions {
    bool timing = true;   ///< false writes wall_time_s = 0 for reproducible output
};

/// One ERO run per strike (the config strike when no sweep is given) on one
/// shared pair of train/test batches.
std::vector<ExperimentRun> run_strikes(const ExperimentConfig& config, const RunOptions& options = {});

/// `price` / `sweep`: strike sweep, or level sweep when `levels` is set.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Rows for each configured reference method (experiment id `<id>:<method>`).
std::vector<ResultRow> run_references(const ExperimentConfig& config, const RunOptions& options = {});

struct LevelSetRun {
    ResultRow row;
    LevelGrid grid;
};

/// Optimizes at the config strike and evaluates the rate grid of `levelset`.
LevelSetRun run_level_set(const ExperimentConfig& config, const RunOptions& options = {});

/// Spatial dimension of the (lag-extended) state.
int state_dimension(const ModelSpec& model, const LagSpec& lags);

/// Wraps the current exception as an ExperimentError tagged with `id`.
[[noreturn]] void rethrow_categorized(const std::string& id);

}  // namespace ero
