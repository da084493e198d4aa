#include "ero/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace ero {

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw FactorizationError("cholesky: matrix is not square");
    if (!a.allFinite()) throw FactorizationError("cholesky: matrix has non-finite entries");
    if (!a.isApprox(a.transpose(), 1e-12)) throw FactorizationError("cholesky: matrix is not symmetric");

    const double scale = std::max(a.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    const double tol = 1e-12 * scale;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
        if (pivot < -tol) {
            throw FactorizationError("cholesky: matrix is not positive semidefinite (pivot " +
                                     std::to_string(j) + ")");
        }
        if (pivot <= tol) continue;
        const double d = std::sqrt(pivot);
        l(j, j) = d;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
        }
    }
    return l;
}

JitteredFactor cholesky_with_jitter(const Eigen::MatrixXd& a, double first_jitter,
                                    double max_jitter, double pivot_floor) {
    const Eigen::Index n = a.rows();
    const double mean_diag = n > 0 ? a.diagonal().mean() : 1.0;
    auto attempt = [&](double jitter) -> std::optional<Eigen::MatrixXd> {
        Eigen::MatrixXd shifted = a;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() != Eigen::Success) return std::nullopt;
        Eigen::MatrixXd l = llt.matrixL();
        if (!l.allFinite()) return std::nullopt;
        const double min_pivot = l.diagonal().minCoeff();
        if (min_pivot * min_pivot <= pivot_floor * mean_diag) return std::nullopt;
        return l;
    };

    if (auto l = attempt(0.0)) return {std::move(*l), 0.0};
    for (double jitter = first_jitter; jitter <= max_jitter * (1.0 + 1e-9); jitter *= 10.0) {
        if (auto l = attempt(jitter)) return {std::move(*l), jitter};
    }
    throw FactorizationError("cholesky: matrix remains singular with diagonal jitter " +
                             std::to_string(max_jitter));
}

}  // namespace ero
