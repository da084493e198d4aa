#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ero/market_models.hpp"
#include "ero/payoffs.hpp"
#include "ero/rate_basis.hpp"
#include "ero/statistics.hpp"

namespace ero {

enum class OptionKind { Put, Call };

struct TreeConfig {
    int levels = 1000;
    OptionKind kind = OptionKind::Put;
    double sigma = 0.3;
    double rate = 0.05;
    double dividend = 0.0;
    double strike = 100.0;
    double spot = 100.0;
    double expiry = 1.0;
};

/// Cox-Ross-Rubinstein lattice with early exercise at every node; O(levels) memory.
/// With sigma = 0 the deterministic forward path is used.
double binomial_tree_american(const TreeConfig& config);

/// Same lattice without early exercise.
double binomial_tree_european(const TreeConfig& config);

/// K e^{-rT} Phi(-d2) - s0 e^{-delta T} Phi(-d1).
double black_scholes_european_put(double sigma, double rate, double strike, double spot, double expiry,
                                  double dividend = 0.0);

/// Mean and standard error of the discounted expiry payoff Y_N.
Estimate european_mc(const PayoffGrid& payoffs);

/// Per-step continuation regression learned on the training batch.
struct ExerciseRule {
    int node = 0;
    BasisTransform basis;
    Eigen::VectorXd monomial_coeffs;  ///< continuation(x) = monomial_coeffs . m(z(x))
};

struct LongstaffSchwartzResult {
    Estimate test;              ///< frozen policy on the test batch (lower bound)
    Estimate train;             ///< in-sample cash flows
    bool exercise_at_start = false;
    std::vector<ExerciseRule> rules;
    int skipped_steps = 0;      ///< steps with too few in-the-money paths to regress
};

/// Backward regression of realized discounted cash flows on a spatial
/// polynomial basis of the in-the-money states at each node.
LongstaffSchwartzResult longstaff_schwartz(const PathBatch& train, const PayoffGrid& train_payoffs,
                                           const PathBatch& test, const PayoffGrid& test_payoffs, int degree);

}  // namespace ero
