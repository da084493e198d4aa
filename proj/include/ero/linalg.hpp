#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace ero {

/// Raised when a covariance or Gram matrix cannot be factorized.
class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lower Cholesky factor of a symmetric PSD matrix.
///
/// Tolerates exactly singular PSD input (zero columns are left zero) but
/// rejects matrices with a clearly negative pivot.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a);

struct JitteredFactor {
    Eigen::MatrixXd lower;  ///< L with L L^T = A + jitter * I
    double jitter = 0.0;
};

/// Cholesky with diagonal jitter escalating by decades from `first_jitter`
/// to `max_jitter`. A factorization counts as successful only when every
/// squared pivot exceeds `pivot_floor` times the mean diagonal.
JitteredFactor cholesky_with_jitter(const Eigen::MatrixXd& a, double first_jitter,
                                    double max_jitter, double pivot_floor);

}  // namespace ero
