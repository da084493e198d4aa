#pragma once

#include <vector>

namespace ero {

/// Uniform grid t_n = n T / N, n = 0..N.
struct TimeGrid {
    double expiry = 1.0;
    int steps = 1;

    double dt() const { return expiry / steps; }
    double node(int n) const { return n == steps ? expiry : expiry * n / steps; }
    int node_count() const { return steps + 1; }
    std::vector<double> nodes() const;
};

/// Throws std::invalid_argument unless expiry > 0 and steps >= 1.
TimeGrid make_time_grid(double expiry, int steps);

}  // namespace ero
