#include "ero/pricing_core.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ero/parallel.hpp"

namespace ero {

namespace {

constexpr std::size_t kPathBlock = 1024;

void check_consistent(const BasisTransform& transform, const PathBatch& batch, const PayoffGrid& payoffs) {
    if (transform.spec().dimension != batch.dimension()) {
        throw std::invalid_argument("pricing: basis dimension does not match the batch state dimension");
    }
    if (payoffs.path_count() != batch.path_count() || payoffs.steps() != batch.grid().steps) {
        throw std::invalid_argument("pricing: payoff grid does not match the batch");
    }
}

}  // namespace

std::vector<double> rate_path(const Eigen::VectorXd& coeffs, const BasisTransform& transform,
                              const PathBatch& batch, std::size_t path,
                              std::span<const std::uint8_t> in_the_money) {
    if (coeffs.size() != transform.size()) throw std::invalid_argument("rate_path: coefficient size mismatch");
    const int steps = batch.grid().steps;
    std::vector<double> rates(static_cast<std::size_t>(steps), 0.0);
    for (int n = 0; n < steps; ++n) {
        if (!in_the_money[static_cast<std::size_t>(n)]) continue;
        const double exponent = coeffs.dot(transform.evaluate(batch.grid().node(n), batch.state(path, n)));
        rates[static_cast<std::size_t>(n)] =
            std::exp(std::clamp(exponent, -kRateExponentClamp, kRateExponentClamp));
    }
    return rates;
}

SurvivalWeights survival_weights(std::span<const double> rates, double dt) {
    SurvivalWeights out;
    out.weights.resize(rates.size() + 1);
    double survival = 1.0;
    for (std::size_t n = 0; n < rates.size(); ++n) {
        const double hazard = rates[n] * dt;
        out.weights[n] = -survival * std::expm1(-hazard);
        survival *= std::exp(-hazard);
    }
    out.weights.back() = survival;
    return out;
}

double phi(const Eigen::VectorXd& coeffs, const BasisTransform& transform, const PathBatch& batch,
           std::size_t path, const PayoffGrid& payoffs) {
    check_consistent(transform, batch, payoffs);
    const auto rates = rate_path(coeffs, transform, batch, path, payoffs.in_the_money(path));
    const auto w = survival_weights(rates, batch.grid().dt());
    const auto y = payoffs.discounted(path);
    double value = 0.0;
    for (std::size_t n = 0; n < w.weights.size(); ++n) value += y[n] * w.weights[n];
    return value;
}

int sample_exercise_time(std::span<const double> rates, double dt, PathEngine& engine) {
    std::exponential_distribution<double> clock(1.0);
    const double threshold = clock(engine);
    double hazard = 0.0;
    for (std::size_t n = 0; n < rates.size(); ++n) {
        hazard += rates[n] * dt;
        if (hazard >= threshold) return static_cast<int>(n);
    }
    return static_cast<int>(rates.size());
}

StandardizedCloud::StandardizedCloud(const BasisTransform& transform, const PathBatch& batch)
    : paths_(batch.path_count()),
      steps_(batch.grid().steps),
      dt_(batch.grid().dt()),
      variables_(transform.variables()),
      spatial_dim_(static_cast<std::size_t>(batch.dimension())) {
    init_times(transform, batch);
    const std::size_t offset = transform.spec().include_time ? 1 : 0;
    values_.assign(paths_ * nodes() * spatial_dim_, 0.0);
    for_each_block(paths_, kPathBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> u(static_cast<std::size_t>(variables_));
        for (std::size_t m = begin; m < end; ++m) {
            for (int n = 0; n <= steps_; ++n) {
                transform.standardize(batch.grid().node(n), batch.state(m, n), u);
                double* dst = values_.data() + (m * nodes() + static_cast<std::size_t>(n)) * spatial_dim_;
                std::copy(u.begin() + static_cast<std::ptrdiff_t>(offset), u.end(), dst);
            }
        }
    });
}

StandardizedCloud::StandardizedCloud(const BasisTransform& transform, PathBatch&& batch)
    : paths_(batch.path_count()),
      steps_(batch.grid().steps),
      dt_(batch.grid().dt()),
      variables_(transform.variables()),
      spatial_dim_(static_cast<std::size_t>(batch.dimension())) {
    init_times(transform, batch);
    const TimeGrid grid = batch.grid();
    const std::size_t offset = transform.spec().include_time ? 1 : 0;
    values_ = std::move(batch).take_values();
    for_each_block(paths_, kPathBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> raw(spatial_dim_);
        std::vector<double> u(static_cast<std::size_t>(variables_));
        for (std::size_t m = begin; m < end; ++m) {
            for (int n = 0; n <= steps_; ++n) {
                double* cell = values_.data() + (m * nodes() + static_cast<std::size_t>(n)) * spatial_dim_;
                std::copy(cell, cell + spatial_dim_, raw.begin());
                transform.standardize(grid.node(n), raw, u);
                std::copy(u.begin() + static_cast<std::ptrdiff_t>(offset), u.end(), cell);
            }
        }
    });
}

void StandardizedCloud::init_times(const BasisTransform& transform, const PathBatch& batch) {
    if (transform.spec().dimension != batch.dimension()) {
        throw std::invalid_argument("pricing: basis dimension does not match the batch state dimension");
    }
    time_.assign(nodes(), 0.0);
    if (!transform.spec().include_time) return;
    std::vector<double> z(static_cast<std::size_t>(variables_));
    for (int n = 0; n <= steps_; ++n) {
        transform.standardize(batch.grid().node(n), batch.state(0, n), z);
        time_[static_cast<std::size_t>(n)] = z[0];
    }
}

ExerciseRateObjective::ExerciseRateObjective(const BasisTransform& transform, const StandardizedCloud& cloud,
                                             const PayoffGrid& payoffs)
    : transform_(&transform), cloud_(&cloud), payoffs_(&payoffs) {
    if (payoffs.path_count() != cloud.path_count() || payoffs.steps() != cloud.steps()) {
        throw std::invalid_argument("pricing: payoff grid does not match the sample cloud");
    }
    if (cloud.variables() != transform.variables()) {
        throw std::invalid_argument("pricing: sample cloud was standardized for another basis");
    }
}

Estimate ExerciseRateObjective::value(const Eigen::VectorXd& coeffs) const {
    return evaluate<false>(coeffs).value;
}

ValueGradient ExerciseRateObjective::value_gradient(const Eigen::VectorXd& coeffs) const {
    return evaluate<true>(coeffs);
}

template <bool WithGradient>
ValueGradient ExerciseRateObjective::evaluate(const Eigen::VectorXd& coeffs) const {
    const int size = transform_->size();
    if (coeffs.size() != size) throw std::invalid_argument("objective: coefficient size mismatch");
    if (!coeffs.allFinite()) throw std::invalid_argument("objective: coefficients must be finite");

    const Eigen::VectorXd mono_coeffs = transform_->monomial_coefficients(coeffs);
    const std::size_t paths = cloud_->path_count();
    const int steps = cloud_->steps();
    const double dt = cloud_->dt();
    const bool timed = transform_->spec().include_time;
    const std::size_t vars = static_cast<std::size_t>(transform_->variables());
    const std::size_t blocks = block_count(paths, kPathBlock);

    std::vector<MomentAccumulator> moments(blocks);
    std::vector<Eigen::VectorXd> gradients(WithGradient ? blocks : 0);

    for_each_block(paths, kPathBlock, [&](std::size_t b, std::size_t begin, std::size_t end) {
        std::vector<double> z(vars);
        Eigen::VectorXd mono(size);
        Eigen::VectorXd cumulative(WithGradient ? size : 0);  // A_n = sum_{i<n} d(lambda_i dt)/dc
        Eigen::VectorXd grad;
        if constexpr (WithGradient) grad = Eigen::VectorXd::Zero(size);
        const std::span<double> mono_span(mono.data(), static_cast<std::size_t>(size));

        for (std::size_t m = begin; m < end; ++m) {
            const auto y = payoffs_->discounted(m);
            const auto itm = payoffs_->in_the_money(m);
            double survival = 1.0;
            double value = 0.0;
            if constexpr (WithGradient) cumulative.setZero();
            bool any_hazard = false;

            for (int n = 0; n < steps; ++n) {
                const auto i = static_cast<std::size_t>(n);
                if (!itm[i]) continue;
                std::size_t j = 0;
                if (timed) z[j++] = cloud_->time(n);
                const auto x = cloud_->spatial(m, n);
                std::copy(x.begin(), x.end(), z.begin() + static_cast<std::ptrdiff_t>(j));
                transform_->monomials(z, mono_span);

                const double exponent = mono_coeffs.dot(mono);
                const bool clamped = exponent > kRateExponentClamp || exponent < -kRateExponentClamp;
                const double hazard =
                    std::exp(std::clamp(exponent, -kRateExponentClamp, kRateExponentClamp)) * dt;
                const double next = survival * std::exp(-hazard);
                const double weight = -survival * std::expm1(-hazard);
                value += y[i] * weight;

                if constexpr (WithGradient) {
                    // dw_n/dc = U_{n+1} a_n - w_n A_n with a_n = d(lambda_n dt)/dc.
                    if (any_hazard) grad.noalias() -= (y[i] * weight) * cumulative;
                    if (!clamped) {
                        grad.noalias() += (y[i] * next * hazard) * mono;
                        cumulative.noalias() += hazard * mono;
                        any_hazard = true;
                    }
                }
                survival = next;
            }
            const double terminal = y[static_cast<std::size_t>(steps)];
            value += terminal * survival;
            if constexpr (WithGradient) {
                if (any_hazard) grad.noalias() -= (terminal * survival) * cumulative;
            }
            moments[b].add(value);
        }
        if constexpr (WithGradient) gradients[b] = std::move(grad);
    });

    MomentAccumulator total;
    for (const auto& acc : moments) total.merge(acc);
    ValueGradient out;
    out.value = total.estimate();
    if constexpr (WithGradient) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(size);
        for (const auto& g : gradients) sum += g;
        sum /= static_cast<double>(paths);
        out.gradient = transform_->feature_gradient(sum);
    }
    return out;
}

Estimate objective(const Eigen::VectorXd& coeffs, const BasisTransform& transform, const PathBatch& batch,
                   const PayoffGrid& payoffs) {
    check_consistent(transform, batch, payoffs);
    const StandardizedCloud cloud(transform, batch);
    return ExerciseRateObjective(transform, cloud, payoffs).value(coeffs);
}

ValueGradient objective_gradient(const Eigen::VectorXd& coeffs, const BasisTransform& transform,
                                 const PathBatch& batch, const PayoffGrid& payoffs) {
    check_consistent(transform, batch, payoffs);
    const StandardizedCloud cloud(transform, batch);
    return ExerciseRateObjective(transform, cloud, payoffs).value_gradient(coeffs);
}

}  // namespace ero
