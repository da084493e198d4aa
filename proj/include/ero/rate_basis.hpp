#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ero/market_models.hpp"

namespace ero {

/// Polynomials of total degree <= degree in (t, x_1, ..., x_d), or in x alone
/// when include_time is false.
struct BasisSpec {
    int degree = 2;
    int dimension = 1;
    bool include_time = true;

    int variables() const { return dimension + (include_time ? 1 : 0); }
    int size() const;
};

/// C(d + 1 + k, k): number of monomials of degree <= k in d + 1 variables.
int basis_dimension(int degree, int dimension);

/// Too few or too collinear sample points to orthonormalize the basis.
class DegenerateSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Standardization + empirical orthonormalization of a monomial basis.
///
/// Features are phi(t, s) = L^{-1} m(z), where z is the standardized point
/// (time, log of asset coordinates, raw variance coordinates) and L L^T is the
/// empirical Gram matrix of the monomials m on the fitting cloud. Monomials are
/// in graded order, so feature 0 is the constant 1.
class BasisTransform {
public:
    BasisTransform(BasisSpec spec, std::vector<CoordinateKind> kinds);

    const BasisSpec& spec() const { return spec_; }
    int size() const { return static_cast<int>(parent_.size()); }
    int variables() const { return spec_.variables(); }

    /// size() x variables() exponent table in graded order.
    std::vector<std::vector<int>> exponent_table() const;

    /// (t, raw state) -> standardized variables; `out` has variables() entries.
    void standardize(double t, std::span<const double> state, std::span<double> out) const;
    /// Raw (unstandardized) variables: time, log assets, raw variances.
    void raw_variables(double t, std::span<const double> state, std::span<double> out) const;
    /// Monomials of standardized variables; `out` has size() entries.
    void monomials(std::span<const double> standardized, std::span<double> out) const;

    Eigen::VectorXd evaluate(double t, std::span<const double> state) const;

    /// Coefficients a with a . m(z) == c . phi(t, s).
    Eigen::VectorXd monomial_coefficients(const Eigen::VectorXd& feature_coeffs) const;
    /// Maps a gradient w.r.t. monomial coefficients to one w.r.t. feature coefficients.
    Eigen::VectorXd feature_gradient(const Eigen::VectorXd& monomial_gradient) const;

    const Eigen::VectorXd& shift() const { return shift_; }
    const Eigen::VectorXd& scale() const { return scale_; }
    const Eigen::MatrixXd& gram_factor() const { return lower_; }
    double jitter() const { return jitter_; }

    /// Installs standardization and Gram factor; used by the fitters.
    void set_standardization(Eigen::VectorXd shift, Eigen::VectorXd scale);
    void set_gram_factor(Eigen::MatrixXd lower, double jitter);

private:
    BasisSpec spec_;
    std::vector<CoordinateKind> kinds_;
    std::vector<int> parent_;    ///< monomial b = monomial parent_[b] * variable var_[b]
    std::vector<int> variable_;
    Eigen::VectorXd shift_;
    Eigen::VectorXd scale_;
    Eigen::MatrixXd lower_;
    double jitter_ = 0.0;
};

/// Fits on every grid node of every path (the time-space sample cloud).
BasisTransform fit_orthonormal_basis(const PathBatch& batch, int degree);

/// Spatial basis (no time variable) fitted on the states of `paths` at one node.
BasisTransform fit_spatial_basis(const PathBatch& batch, int node, std::span<const std::size_t> paths,
                                 int degree);

Eigen::VectorXd evaluate_basis(const BasisTransform& transform, double t, std::span<const double> state);

/// (1 / (N+1) M) sum phi phi^T over the time-space cloud of `batch`.
Eigen::MatrixXd empirical_gram(const BasisTransform& transform, const PathBatch& batch);

}  // namespace ero
