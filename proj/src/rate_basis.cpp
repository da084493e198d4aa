#include "ero/rate_basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ero/linalg.hpp"
#include "ero/parallel.hpp"
#include "ero/statistics.hpp"

namespace ero {

namespace {

constexpr std::size_t kReductionSlots = 64;
constexpr std::size_t kChunkPoints = 512;
constexpr double kFirstJitter = 1e-12;
constexpr double kMaxJitter = 1e-6;
constexpr double kPivotFloor = 1e-14;

std::size_t slot_size(std::size_t points) {
    return std::max<std::size_t>(kChunkPoints, block_count(points, kReductionSlots));
}

/// Fits standardization and Gram factor from raw variables produced by
/// `raw(i, out)` for points i in [0, points).
template <class RawPoint>
void fit_transform(BasisTransform& transform, std::size_t points, RawPoint&& raw) {
    const int vars = transform.variables();
    const int size = transform.size();
    if (points < static_cast<std::size_t>(size)) {
        throw DegenerateSampleError("basis: " + std::to_string(points) + " sample points cannot determine " +
                                    std::to_string(size) + " basis functions");
    }
    const std::size_t block = slot_size(points);
    const std::size_t blocks = block_count(points, block);

    // Pass 1: per-variable mean and variance.
    std::vector<std::vector<MomentAccumulator>> moments(blocks, std::vector<MomentAccumulator>(vars));
    for_each_block(points, block, [&](std::size_t b, std::size_t begin, std::size_t end) {
        std::vector<double> u(static_cast<std::size_t>(vars));
        for (std::size_t i = begin; i < end; ++i) {
            raw(i, std::span<double>(u));
            for (int j = 0; j < vars; ++j) moments[b][static_cast<std::size_t>(j)].add(u[static_cast<std::size_t>(j)]);
        }
    });
    Eigen::VectorXd shift(vars);
    Eigen::VectorXd scale(vars);
    for (int j = 0; j < vars; ++j) {
        MomentAccumulator total;
        for (const auto& slot : moments) total.merge(slot[static_cast<std::size_t>(j)]);
        shift(j) = total.mean();
        const double sd = std::sqrt(total.variance());
        scale(j) = sd > 1e-12 * std::max(1.0, std::abs(total.mean())) ? sd : 1.0;
    }
    transform.set_standardization(shift, scale);

    // Pass 2: Gram matrix of the standardized monomials.
    std::vector<Eigen::MatrixXd> partial(blocks);
    for_each_block(points, block, [&](std::size_t b, std::size_t begin, std::size_t end) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(size, size);
        Eigen::MatrixXd chunk(size, static_cast<Eigen::Index>(kChunkPoints));
        std::vector<double> u(static_cast<std::size_t>(vars));
        for (std::size_t start = begin; start < end; start += kChunkPoints) {
            const std::size_t stop = std::min(end, start + kChunkPoints);
            const auto cols = static_cast<Eigen::Index>(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                raw(i, std::span<double>(u));
                for (int j = 0; j < vars; ++j) {
                    u[static_cast<std::size_t>(j)] = (u[static_cast<std::size_t>(j)] - shift(j)) / scale(j);
                }
                auto col = chunk.col(static_cast<Eigen::Index>(i - start));
                transform.monomials(u, std::span<double>(col.data(), static_cast<std::size_t>(size)));
            }
            gram.selfadjointView<Eigen::Lower>().rankUpdate(chunk.leftCols(cols));
        }
        partial[b] = std::move(gram);
    });
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(size, size);
    for (const auto& p : partial) gram += p;
    gram /= static_cast<double>(points);
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

    JitteredFactor factor;
    try {
        factor = cholesky_with_jitter(gram, kFirstJitter, kMaxJitter, kPivotFloor);
    } catch (const FactorizationError& e) {
        throw DegenerateSampleError(std::string("basis: degenerate sample cloud (") + e.what() +
                                    "); increase the path count or lower the degree");
    }
    Eigen::MatrixXd lower = std::move(factor.lower);
    if (factor.jitter == 0.0) {
        // One refinement sweep: re-orthonormalize the features against the
        // same Gram matrix to remove the rounding left by the first factor.
        Eigen::MatrixXd inv_l = lower.triangularView<Eigen::Lower>().solve(
            Eigen::MatrixXd::Identity(size, size));
        Eigen::MatrixXd residual = inv_l * gram * inv_l.transpose();
        residual = 0.5 * (residual + residual.transpose()).eval();
        Eigen::LLT<Eigen::MatrixXd> llt(residual);
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd correction = llt.matrixL();
            lower = (lower * correction).triangularView<Eigen::Lower>();
        }
    }
    transform.set_gram_factor(std::move(lower), factor.jitter);
}

}  // namespace

int BasisSpec::size() const {
    return include_time ? basis_dimension(degree, dimension) : basis_dimension(degree, dimension - 1);
}

int basis_dimension(int degree, int dimension) {
    if (degree < 0) throw std::invalid_argument("basis: degree must be non-negative");
    if (dimension < 0) throw std::invalid_argument("basis: dimension must be non-negative");
    // C(n, k) with n = dimension + 1 + degree, computed incrementally.
    long long value = 1;
    const int vars = dimension + 1;
    for (int i = 1; i <= degree; ++i) value = value * (vars + i) / i;
    return static_cast<int>(value);
}

BasisTransform::BasisTransform(BasisSpec spec, std::vector<CoordinateKind> kinds)
    : spec_(spec), kinds_(std::move(kinds)) {
    if (spec_.degree < 0) throw std::invalid_argument("basis: degree must be non-negative");
    if (static_cast<int>(kinds_.size()) != spec_.dimension) {
        throw std::invalid_argument("basis: coordinate kinds do not match the state dimension");
    }
    if (spec_.variables() < 1) throw std::invalid_argument("basis: no variables");

    // Graded enumeration: every monomial of degree g extends one of degree
    // g - 1 by a variable no smaller than the largest one it already uses.
    parent_ = {-1};
    variable_ = {-1};
    std::vector<int> largest = {0};
    std::size_t level_begin = 0;
    for (int g = 1; g <= spec_.degree; ++g) {
        const std::size_t level_end = parent_.size();
        for (std::size_t p = level_begin; p < level_end; ++p) {
            for (int v = largest[p]; v < variables(); ++v) {
                parent_.push_back(static_cast<int>(p));
                variable_.push_back(v);
                largest.push_back(v);
            }
        }
        level_begin = level_end;
    }
    shift_ = Eigen::VectorXd::Zero(variables());
    scale_ = Eigen::VectorXd::Ones(variables());
    lower_ = Eigen::MatrixXd::Identity(size(), size());
}

std::vector<std::vector<int>> BasisTransform::exponent_table() const {
    std::vector<std::vector<int>> table(parent_.size(), std::vector<int>(static_cast<std::size_t>(variables()), 0));
    for (std::size_t b = 1; b < parent_.size(); ++b) {
        table[b] = table[static_cast<std::size_t>(parent_[b])];
        ++table[b][static_cast<std::size_t>(variable_[b])];
    }
    return table;
}

void BasisTransform::raw_variables(double t, std::span<const double> state, std::span<double> out) const {
    std::size_t j = 0;
    if (spec_.include_time) out[j++] = t;
    for (std::size_t i = 0; i < kinds_.size(); ++i) {
        out[j++] = kinds_[i] == CoordinateKind::Asset ? std::log(state[i]) : state[i];
    }
}

void BasisTransform::standardize(double t, std::span<const double> state, std::span<double> out) const {
    raw_variables(t, state, out);
    for (int j = 0; j < variables(); ++j) {
        out[static_cast<std::size_t>(j)] = (out[static_cast<std::size_t>(j)] - shift_(j)) / scale_(j);
    }
}

void BasisTransform::monomials(std::span<const double> z, std::span<double> out) const {
    out[0] = 1.0;
    for (std::size_t b = 1; b < parent_.size(); ++b) {
        out[b] = out[static_cast<std::size_t>(parent_[b])] * z[static_cast<std::size_t>(variable_[b])];
    }
}

Eigen::VectorXd BasisTransform::evaluate(double t, std::span<const double> state) const {
    std::vector<double> z(static_cast<std::size_t>(variables()));
    standardize(t, state, z);
    Eigen::VectorXd m(size());
    monomials(z, std::span<double>(m.data(), static_cast<std::size_t>(size())));
    return lower_.triangularView<Eigen::Lower>().solve(m);
}

Eigen::VectorXd BasisTransform::monomial_coefficients(const Eigen::VectorXd& feature_coeffs) const {
    return lower_.transpose().triangularView<Eigen::Upper>().solve(feature_coeffs);
}

Eigen::VectorXd BasisTransform::feature_gradient(const Eigen::VectorXd& monomial_gradient) const {
    return lower_.triangularView<Eigen::Lower>().solve(monomial_gradient);
}

void BasisTransform::set_standardization(Eigen::VectorXd shift, Eigen::VectorXd scale) {
    shift_ = std::move(shift);
    scale_ = std::move(scale);
}

void BasisTransform::set_gram_factor(Eigen::MatrixXd lower, double jitter) {
    lower_ = std::move(lower);
    jitter_ = jitter;
}

BasisTransform fit_orthonormal_basis(const PathBatch& batch, int degree) {
    BasisTransform transform(BasisSpec{degree, batch.dimension(), true}, batch.kinds());
    const auto nodes = static_cast<std::size_t>(batch.grid().node_count());
    const std::size_t points = batch.path_count() * nodes;
    fit_transform(transform, points, [&](std::size_t i, std::span<double> out) {
        const std::size_t m = i / nodes;
        const int n = static_cast<int>(i % nodes);
        transform.raw_variables(batch.grid().node(n), batch.state(m, n), out);
    });
    return transform;
}

BasisTransform fit_spatial_basis(const PathBatch& batch, int node, std::span<const std::size_t> paths,
                                 int degree) {
    BasisTransform transform(BasisSpec{degree, batch.dimension(), false}, batch.kinds());
    const double t = batch.grid().node(node);
    fit_transform(transform, paths.size(), [&](std::size_t i, std::span<double> out) {
        transform.raw_variables(t, batch.state(paths[i], node), out);
    });
    return transform;
}

Eigen::VectorXd evaluate_basis(const BasisTransform& transform, double t, std::span<const double> state) {
    return transform.evaluate(t, state);
}

Eigen::MatrixXd empirical_gram(const BasisTransform& transform, const PathBatch& batch) {
    const int size = transform.size();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(size, size);
    for (std::size_t m = 0; m < batch.path_count(); ++m) {
        for (int n = 0; n <= batch.grid().steps; ++n) {
            const Eigen::VectorXd phi = transform.evaluate(batch.grid().node(n), batch.state(m, n));
            gram.noalias() += phi * phi.transpose();
        }
    }
    return gram / static_cast<double>(batch.path_count() * static_cast<std::size_t>(batch.grid().node_count()));
}

}  // namespace ero
