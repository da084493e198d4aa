#include "ero/reference_pricers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ero/parallel.hpp"

namespace ero {

namespace {

constexpr std::size_t kPathBlock = 1024;

void validate_tree(const TreeConfig& c) {
    if (c.levels < 1) throw std::invalid_argument("tree: levels must be at least 1");
    if (!(c.sigma >= 0.0) || !(c.strike > 0.0) || !(c.spot > 0.0) || !(c.expiry > 0.0)) {
        throw std::invalid_argument("tree: require sigma >= 0 and positive strike, spot and expiry");
    }
    if (!std::isfinite(c.rate) || !std::isfinite(c.dividend)) throw std::invalid_argument("tree: rates must be finite");
}

double intrinsic(OptionKind kind, double strike, double spot) {
    return kind == OptionKind::Put ? std::max(strike - spot, 0.0) : std::max(spot - strike, 0.0);
}

double deterministic_path(const TreeConfig& c, bool american) {
    const double dt = c.expiry / c.levels;
    const double growth = c.rate - c.dividend;
    if (!american) {
        return std::exp(-c.rate * c.expiry) * intrinsic(c.kind, c.strike, c.spot * std::exp(growth * c.expiry));
    }
    double best = 0.0;
    for (int n = 0; n <= c.levels; ++n) {
        const double t = n * dt;
        best = std::max(best, std::exp(-c.rate * t) * intrinsic(c.kind, c.strike, c.spot * std::exp(growth * t)));
    }
    return best;
}

double crr(const TreeConfig& c, bool american) {
    validate_tree(c);
    if (c.sigma == 0.0) return deterministic_path(c, american);

    const int levels = c.levels;
    const double dt = c.expiry / levels;
    const double jump = c.sigma * std::sqrt(dt);
    const double up = std::exp(jump);
    const double down = 1.0 / up;
    const double p = (std::exp((c.rate - c.dividend) * dt) - down) / (up - down);
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("tree: risk-neutral probability outside (0, 1); refine the lattice");
    const double discount = std::exp(-c.rate * dt);
    const double pu = discount * p;
    const double pd = discount * (1.0 - p);

    // price[i] = s0 u^{i - levels}; node (n, j) sits at index levels - n + 2j.
    std::vector<double> price(2 * static_cast<std::size_t>(levels) + 1);
    for (std::size_t i = 0; i < price.size(); ++i) {
        price[i] = c.spot * std::exp((static_cast<double>(i) - levels) * jump);
    }
    std::vector<double> value(static_cast<std::size_t>(levels) + 1);
    for (int j = 0; j <= levels; ++j) {
        value[static_cast<std::size_t>(j)] = intrinsic(c.kind, c.strike, price[2 * static_cast<std::size_t>(j)]);
    }
    for (int n = levels - 1; n >= 0; --n) {
        const std::size_t base = static_cast<std::size_t>(levels - n);
        for (int j = 0; j <= n; ++j) {
            const auto k = static_cast<std::size_t>(j);
            const double hold = pd * value[k] + pu * value[k + 1];
            value[k] = american ? std::max(hold, intrinsic(c.kind, c.strike, price[base + 2 * k])) : hold;
        }
    }
    return value[0];
}

}  // namespace

double binomial_tree_american(const TreeConfig& config) { return crr(config, true); }

double binomial_tree_european(const TreeConfig& config) { return crr(config, false); }

double black_scholes_european_put(double sigma, double rate, double strike, double spot, double expiry,
                                  double dividend) {
    if (!(sigma >= 0.0) || !(strike >= 0.0) || !(spot > 0.0) || !(expiry > 0.0)) {
        throw std::invalid_argument("black_scholes_european_put: invalid inputs");
    }
    const double discounted_strike = strike * std::exp(-rate * expiry);
    const double forward_spot = spot * std::exp(-dividend * expiry);
    if (strike == 0.0) return 0.0;
    if (sigma == 0.0) return std::max(discounted_strike - forward_spot, 0.0);
    const double vol = sigma * std::sqrt(expiry);
    const double d1 = (std::log(spot / strike) + (rate - dividend + 0.5 * sigma * sigma) * expiry) / vol;
    const double d2 = d1 - vol;
    const auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    return discounted_strike * cdf(-d2) - forward_spot * cdf(-d1);
}

Estimate european_mc(const PayoffGrid& payoffs) {
    const std::size_t paths = payoffs.path_count();
    const auto last = static_cast<std::size_t>(payoffs.steps());
    std::vector<MomentAccumulator> partial(block_count(paths, kPathBlock));
    for_each_block(paths, kPathBlock, [&](std::size_t b, std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) partial[b].add(payoffs.discounted(m)[last]);
    });
    MomentAccumulator total;
    for (const auto& p : partial) total.merge(p);
    return total.estimate();
}

namespace {

/// Continuation estimate of every listed path at one node under a rule.
void continuation_values(const ExerciseRule& rule, const PathBatch& batch, std::span<const std::size_t> paths,
                         std::span<double> out) {
    const int size = rule.basis.size();
    const double t = batch.grid().node(rule.node);
    for_each_block(paths.size(), kPathBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> z(static_cast<std::size_t>(rule.basis.variables()));
        Eigen::VectorXd mono(size);
        for (std::size_t i = begin; i < end; ++i) {
            rule.basis.standardize(t, batch.state(paths[i], rule.node), z);
            rule.basis.monomials(z, std::span<double>(mono.data(), static_cast<std::size_t>(size)));
            out[i] = rule.monomial_coeffs.dot(mono);
        }
    });
}

std::vector<std::size_t> in_the_money_paths(const PayoffGrid& payoffs, int node) {
    std::vector<std::size_t> paths;
    for (std::size_t m = 0; m < payoffs.path_count(); ++m) {
        if (payoffs.in_the_money(m)[static_cast<std::size_t>(node)]) paths.push_back(m);
    }
    return paths;
}

}  // namespace

LongstaffSchwartzResult longstaff_schwartz(const PathBatch& train, const PayoffGrid& train_payoffs,
                                           const PathBatch& test, const PayoffGrid& test_payoffs, int degree) {
    if (train.grid().steps != test.grid().steps || train.grid().expiry != test.grid().expiry) {
        throw std::invalid_argument("longstaff_schwartz: train and test grids differ");
    }
    if (train_payoffs.path_count() != train.path_count() || test_payoffs.path_count() != test.path_count()) {
        throw std::invalid_argument("longstaff_schwartz: payoff grids do not match the batches");
    }
    if (degree < 0) throw std::invalid_argument("longstaff_schwartz: degree must be non-negative");

    const int steps = train.grid().steps;
    const std::size_t paths = train.path_count();
    const int basis_size = BasisSpec{degree, train.dimension(), false}.size();

    LongstaffSchwartzResult result;
    std::vector<double> cashflow(paths);
    for (std::size_t m = 0; m < paths; ++m) cashflow[m] = train_payoffs.discounted(m)[static_cast<std::size_t>(steps)];

    for (int n = steps - 1; n >= 1; --n) {
        const auto itm = in_the_money_paths(train_payoffs, n);
        if (itm.size() < static_cast<std::size_t>(basis_size)) {
            ++result.skipped_steps;
            continue;
        }
        BasisTransform basis = [&] {
            try {
                return fit_spatial_basis(train, n, itm, degree);
            } catch (const DegenerateSampleError&) {
                return BasisTransform(BasisSpec{0, train.dimension(), false}, train.kinds());
            }
        }();
        if (basis.size() != basis_size) {
            ++result.skipped_steps;
            continue;
        }

        // Projection onto orthonormal features: beta = mean(phi CF) = L^{-1} mean(m CF).
        const double t = train.grid().node(n);
        const std::size_t blocks = block_count(itm.size(), kPathBlock);
        std::vector<Eigen::VectorXd> partial(blocks);
        for_each_block(itm.size(), kPathBlock, [&](std::size_t b, std::size_t begin, std::size_t end) {
            std::vector<double> z(static_cast<std::size_t>(basis.variables()));
            Eigen::VectorXd mono(basis_size);
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(basis_size);
            for (std::size_t i = begin; i < end; ++i) {
                basis.standardize(t, train.state(itm[i], n), z);
                basis.monomials(z, std::span<double>(mono.data(), static_cast<std::size_t>(basis_size)));
                sum.noalias() += cashflow[itm[i]] * mono;
            }
            partial[b] = std::move(sum);
        });
        Eigen::VectorXd moment = Eigen::VectorXd::Zero(basis_size);
        for (const auto& p : partial) moment += p;
        moment /= static_cast<double>(itm.size());
        const Eigen::VectorXd beta = basis.gram_factor().triangularView<Eigen::Lower>().solve(moment);

        ExerciseRule rule{n, std::move(basis), Eigen::VectorXd()};
        rule.monomial_coeffs = rule.basis.monomial_coefficients(beta);

        std::vector<double> hold(itm.size());
        continuation_values(rule, train, itm, hold);
        for (std::size_t i = 0; i < itm.size(); ++i) {
            const double now = train_payoffs.discounted(itm[i])[static_cast<std::size_t>(n)];
            if (now > hold[i]) cashflow[itm[i]] = now;
        }
        result.rules.push_back(std::move(rule));
    }
    std::reverse(result.rules.begin(), result.rules.end());

    // Every path starts from the same state, so the time-0 continuation value is the plain mean.
    MomentAccumulator in_sample;
    for (double c : cashflow) in_sample.add(c);
    const double start_payoff = train_payoffs.discounted(0)[0];
    result.exercise_at_start = start_payoff > 0.0 && start_payoff > in_sample.mean();
    if (result.exercise_at_start) {
        result.train = {start_payoff, 0.0, paths};
    } else {
        result.train = in_sample.estimate();
    }

    // Frozen policy on the test batch.
    const std::size_t test_paths = test.path_count();
    std::vector<double> realized(test_paths);
    std::vector<std::uint8_t> stopped(test_paths, 0);
    if (result.exercise_at_start) {
        for (std::size_t m = 0; m < test_paths; ++m) {
            realized[m] = test_payoffs.discounted(m)[0];
            stopped[m] = 1;
        }
    } else {
        for (const auto& rule : result.rules) {
            std::vector<std::size_t> candidates;
            for (std::size_t m = 0; m < test_paths; ++m) {
                if (!stopped[m] && test_payoffs.in_the_money(m)[static_cast<std::size_t>(rule.node)]) {
                    candidates.push_back(m);
                }
            }
            std::vector<double> hold(candidates.size());
            continuation_values(rule, test, candidates, hold);
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                const double now = test_payoffs.discounted(candidates[i])[static_cast<std::size_t>(rule.node)];
                if (now > hold[i]) {
                    realized[candidates[i]] = now;
                    stopped[candidates[i]] = 1;
                }
            }
        }
        for (std::size_t m = 0; m < test_paths; ++m) {
            if (!stopped[m]) realized[m] = test_payoffs.discounted(m)[static_cast<std::size_t>(steps)];
        }
    }
    result.test = estimate_of(realized);
    return result;
}

}  // namespace ero
