#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ero/payoffs.hpp"
#include "ero/rate_basis.hpp"

namespace ero {

/// Axis index kTimeAxis selects time instead of a state coordinate.
inline constexpr int kTimeAxis = -1;

struct GridWindow {
    int axis_x = 0;
    int axis_y = 1;
    double t_slice = 0.0;
    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    int nx = 101;
    int ny = 101;
};

/// ny rows of nx exercise rates; row j holds y_j, column i holds x_i.
struct LevelGrid {
    GridWindow window;
    std::vector<double> values;

    double at(int ix, int iy) const {
        return values[static_cast<std::size_t>(iy) * static_cast<std::size_t>(window.nx) + static_cast<std::size_t>(ix)];
    }
    double x(int ix) const;
    double y(int iy) const;
};

/// lambda = 1{g > 0} exp(clamp(c . phi)) on a 2d slice; coordinates other
/// than the two axes are taken from `pinned` (a full state vector).
LevelGrid rate_level_grid(const Eigen::VectorXd& coeffs, const BasisTransform& transform,
                          const PayoffSpec& payoff, int assets, std::span<const double> pinned,
                          const GridWindow& window);

/// Number of 4-connected components of {lambda >= threshold}.
int count_components(const LevelGrid& grid, double threshold);

/// Largest |log-rate difference| between mirror cells (i, j) and (j, i) over
/// cells where both rates are positive, relative to the largest |log-rate|
/// in that set. Requires a square grid with equal axis ranges.
double axis_swap_asymmetry(const LevelGrid& grid);

void write_level_grid(const LevelGrid& grid, const std::string& path);
LevelGrid read_level_grid(const std::string& path);

}  // namespace ero
