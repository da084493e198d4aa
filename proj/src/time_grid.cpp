#include "ero/time_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace ero {

std::vector<double> TimeGrid::nodes() const {
    std::vector<double> out(static_cast<std::size_t>(steps) + 1);
    for (int n = 0; n <= steps; ++n) out[static_cast<std::size_t>(n)] = node(n);
    return out;
}

TimeGrid make_time_grid(double expiry, int steps) {
    if (!(expiry > 0.0) || !std::isfinite(expiry)) {
        throw std::invalid_argument("time grid: expiry must be positive and finite");
    }
    if (steps < 1) throw std::invalid_argument("time grid: step count must be at least 1");
    return TimeGrid{expiry, steps};
}

}  // namespace ero
