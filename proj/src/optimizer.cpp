#include "ero/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "ero/rng.hpp"

namespace ero {

namespace {

constexpr std::uint64_t kTrainLabel = 1;
constexpr std::uint64_t kTestLabel = 2;

/// Restriction of the minimized function h = -f to the search ray.
struct TrialPoint {
    double step = 0.0;
    double value = 0.0;   ///< h(x + step d)
    double slope = 0.0;   ///< h'(x + step d) . d
    double train = 0.0;   ///< f at the trial point
    Eigen::VectorXd gradient;  ///< grad f at the trial point
};

/// Minimizer of the cubic through (a, fa, da) and (b, fb, db), kept inside
/// the interior of [lo, hi]; falls back to bisection when the cubic is unusable.
double cubic_step(const TrialPoint& a, const TrialPoint& b) {
    const double lo = std::min(a.step, b.step);
    const double hi = std::max(a.step, b.step);
    const double width = hi - lo;
    const double mid = 0.5 * (lo + hi);
    const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.step - b.step);
    const double disc = d1 * d1 - a.slope * b.slope;
    if (!(disc >= 0.0) || !std::isfinite(d1)) return mid;
    const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
    const double denom = b.slope - a.slope + 2.0 * d2;
    if (denom == 0.0 || !std::isfinite(denom)) return mid;
    const double step = b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
    if (!std::isfinite(step)) return mid;
    return std::clamp(step, lo + 0.1 * width, hi - 0.1 * width);
}

struct LineSearchResult {
    bool converged = false;
    TrialPoint best;      ///< lowest h seen that satisfies sufficient decrease (step 0 if none)
    int evaluations = 0;
};

class LineSearch {
public:
    LineSearch(const ValueGradientFn& fn, const Eigen::VectorXd& x, const Eigen::VectorXd& direction,
               const TrialPoint& origin, const OptimizerConfig& config)
        : fn_(fn), x_(x), direction_(direction), origin_(origin), config_(config) {}

    LineSearchResult run(double initial_step) {
        result_.best = origin_;
        TrialPoint previous = origin_;
        double step = initial_step;
        while (result_.evaluations < config_.max_line_search) {
            TrialPoint trial = evaluate(step);
            if (!sufficient(trial) || (result_.evaluations > 1 && trial.value >= previous.value)) {
                return zoom(previous, trial);
            }
            remember(trial);
            if (std::abs(trial.slope) <= -config_.c2 * origin_.slope) return done(trial);
            if (trial.slope >= 0.0) return zoom(trial, previous);
            previous = trial;
            step *= 2.0;
        }
        return result_;
    }

private:
    TrialPoint evaluate(double step) {
        ++result_.evaluations;
        TrialPoint p;
        p.step = step;
        auto [value, gradient] = fn_(x_ + step * direction_);
        p.train = value;
        p.value = -value;
        p.slope = -gradient.dot(direction_);
        p.gradient = std::move(gradient);
        if (!std::isfinite(p.value) || !std::isfinite(p.slope)) {
            p.value = std::numeric_limits<double>::infinity();
            p.slope = std::numeric_limits<double>::infinity();
        }
        return p;
    }

    bool sufficient(const TrialPoint& p) const {
        return p.value <= origin_.value + config_.c1 * p.step * origin_.slope;
    }

    void remember(const TrialPoint& p) {
        if (p.value < result_.best.value) result_.best = p;
    }

    LineSearchResult done(const TrialPoint& p) {
        result_.converged = true;
        result_.best = p;
        return result_;
    }

    /// `lo` satisfies sufficient decrease and has the lower value; the
    /// minimizer lies between lo and hi.
    LineSearchResult zoom(TrialPoint lo, TrialPoint hi) {
        while (result_.evaluations < config_.max_line_search) {
            if (std::abs(hi.step - lo.step) <= 1e-16 * std::max(1.0, std::abs(lo.step))) break;
            TrialPoint trial = evaluate(cubic_step(lo, hi));
            if (!sufficient(trial) || trial.value >= lo.value) {
                hi = std::move(trial);
                continue;
            }
            remember(trial);
            if (std::abs(trial.slope) <= -config_.c2 * origin_.slope) return done(trial);
            if (trial.slope * (hi.step - lo.step) >= 0.0) hi = lo;
            lo = std::move(trial);
        }
        return result_;
    }

    const ValueGradientFn& fn_;
    const Eigen::VectorXd& x_;
    const Eigen::VectorXd& direction_;
    const TrialPoint& origin_;
    const OptimizerConfig& config_;
    LineSearchResult result_;
};

struct CurvaturePair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

/// Two-loop recursion: returns -H g for the minimized function with gradient g.
Eigen::VectorXd descent_direction(const std::deque<CurvaturePair>& pairs, const Eigen::VectorXd& g) {
    Eigen::VectorXd q = g;
    std::vector<double> alpha(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
        alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
        q -= alpha[i] * pairs[i].y;
    }
    if (!pairs.empty()) {
        const auto& last = pairs.back();
        q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double beta = pairs[i].rho * pairs[i].y.dot(q);
        q += (alpha[i] - beta) * pairs[i].s;
    }
    return -q;
}

double sup_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

void validate_optimizer_config(const OptimizerConfig& config) {
    if (!(config.c1 > 0.0 && config.c1 < config.c2 && config.c2 < 1.0)) {
        throw std::invalid_argument("optimizer: require 0 < c1 < c2 < 1");
    }
    if (config.memory < 1) throw std::invalid_argument("optimizer: memory must be at least 1");
    if (config.max_iters < 0) throw std::invalid_argument("optimizer: max_iters must be non-negative");
    if (!(config.grad_tol >= 0.0)) throw std::invalid_argument("optimizer: grad_tol must be non-negative");
    if (config.test_every < 1) throw std::invalid_argument("optimizer: test_every must be at least 1");
    if (config.max_line_search < 1) throw std::invalid_argument("optimizer: max_line_search must be at least 1");
}

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::MaxIters: return "max_iters";
        case StopReason::GradTol: return "grad_tol";
        case StopReason::TestDecrease: return "test_decrease";
        case StopReason::LineSearchFailure: return "line_search_failure";
    }
    return "unknown";
}

std::optional<StopReason> parse_stop_reason(const std::string& text) {
    for (auto r : {StopReason::MaxIters, StopReason::GradTol, StopReason::TestDecrease,
                   StopReason::LineSearchFailure}) {
        if (to_string(r) == text) return r;
    }
    return std::nullopt;
}

const IterationRecord& OptimReport::selected() const {
    for (const auto& rec : history) {
        if (rec.iteration == selected_iteration) return rec;
    }
    throw std::logic_error("optimizer report: selected iteration missing from history");
}

OptimReport maximize(const ValueGradientFn& value_gradient, const TestFn& test, int dimension,
                     const OptimizerConfig& config) {
    validate_optimizer_config(config);
    if (dimension < 1) throw std::invalid_argument("optimizer: dimension must be at least 1");

    OptimReport report;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dimension);
    TrialPoint current;
    {
        auto [value, gradient] = value_gradient(x);
        if (!std::isfinite(value) || !gradient.allFinite()) {
            throw std::runtime_error("optimizer: objective is not finite at the starting point");
        }
        current.train = value;
        current.value = -value;
        current.gradient = std::move(gradient);
    }
    report.evaluations = 1;

    IterationRecord start;
    start.train_value = current.train;
    start.grad_norm = sup_norm(current.gradient);
    start.evaluations = report.evaluations;
    if (test) start.test = test(x);
    report.history.push_back(start);

    Eigen::VectorXd best_x = x;
    double best_test = start.test ? start.test->mean : -std::numeric_limits<double>::infinity();
    double last_test = start.test ? start.test->mean : -std::numeric_limits<double>::infinity();
    report.stop_reason = StopReason::MaxIters;

    std::deque<CurvaturePair> pairs;
    for (int iter = 1;; ++iter) {
        if (sup_norm(current.gradient) <= config.grad_tol) {
            report.stop_reason = StopReason::GradTol;
            break;
        }
        if (iter > config.max_iters) {
            report.stop_reason = StopReason::MaxIters;
            break;
        }

        const Eigen::VectorXd g_min = -current.gradient;
        Eigen::VectorXd direction = descent_direction(pairs, g_min);
        current.slope = g_min.dot(direction);
        if (!(current.slope < 0.0)) {
            pairs.clear();
            direction = -g_min;
            current.slope = g_min.dot(direction);
        }
        // Without curvature information the unit step is taken along the
        // normalized gradient.
        if (pairs.empty()) {
            const double norm = direction.norm();
            direction /= norm;
            current.slope /= norm;
        }

        LineSearch search(value_gradient, x, direction, current, config);
        const LineSearchResult ls = search.run(1.0);
        report.evaluations += ls.evaluations;

        const bool moved = ls.best.step > 0.0;
        if (moved) {
            const Eigen::VectorXd s = ls.best.step * direction;
            const Eigen::VectorXd y = current.gradient - ls.best.gradient;  // gradient change of h = -f
            x += s;
            const double sy = s.dot(y);
            if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
                pairs.push_back({s, y, 1.0 / sy});
                if (static_cast<int>(pairs.size()) > config.memory) pairs.pop_front();
            }
            current = ls.best;
            current.step = 0.0;
            ++report.iterations;

            IterationRecord rec;
            rec.iteration = report.iterations;
            rec.train_value = current.train;
            rec.grad_norm = sup_norm(current.gradient);
            rec.step = ls.best.step;
            rec.evaluations = report.evaluations;
            const bool test_now = test && (report.iterations % config.test_every == 0);
            if (test_now) rec.test = test(x);
            report.history.push_back(rec);

            if (!test || !config.early_stop) {
                best_x = x;
                report.selected_iteration = report.iterations;
            }
            if (test && test_now) {
                const double value = rec.test->mean;
                if (config.early_stop && value > best_test) {
                    best_test = value;
                    best_x = x;
                    report.selected_iteration = report.iterations;
                }
                const bool decreased = value < last_test;
                last_test = value;
                if (config.early_stop && decreased) {
                    report.stop_reason = StopReason::TestDecrease;
                    break;
                }
            }
        }
        if (!ls.converged) {
            report.stop_reason = StopReason::LineSearchFailure;
            break;
        }
    }

    report.coefficients = best_x;
    return report;
}

TrainTestPlan train_test_plan(std::size_t train_paths, std::size_t test_paths, std::uint64_t seed) {
    if (train_paths == 0 || test_paths == 0) {
        throw std::invalid_argument("train/test split: both batches need at least one path");
    }
    return {{train_paths, derive_seed(seed, kTrainLabel)}, {test_paths, derive_seed(seed, kTestLabel)}};
}

TrainTestPlan train_test_split(std::size_t total_paths, std::uint64_t seed) {
    if (total_paths == 0 || total_paths % 2 != 0) {
        throw std::invalid_argument("train/test split: total path count must be even and positive");
    }
    return train_test_plan(total_paths / 2, total_paths / 2, seed);
}

}  // namespace ero
