#include "ero/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ero/pricing_core.hpp"
#include "ero/results_io.hpp"

namespace ero {

namespace {

double axis_point(double lo, double hi, int count, int i) {
    return count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
}

void validate_window(const GridWindow& w, int dimension) {
    if (w.nx < 1 || w.ny < 1) throw std::invalid_argument("level grid: resolution must be positive");
    for (int axis : {w.axis_x, w.axis_y}) {
        if (axis < kTimeAxis || axis >= dimension) throw std::invalid_argument("level grid: axis out of range");
    }
    if (w.axis_x == w.axis_y) throw std::invalid_argument("level grid: axes must differ");
    if (!(w.x_hi >= w.x_lo) || !(w.y_hi >= w.y_lo)) throw std::invalid_argument("level grid: empty bounds");
}

}  // namespace

double LevelGrid::x(int ix) const { return axis_point(window.x_lo, window.x_hi, window.nx, ix); }
double LevelGrid::y(int iy) const { return axis_point(window.y_lo, window.y_hi, window.ny, iy); }

LevelGrid rate_level_grid(const Eigen::VectorXd& coeffs, const BasisTransform& transform,
                          const PayoffSpec& payoff, int assets, std::span<const double> pinned,
                          const GridWindow& window) {
    const int dimension = transform.spec().dimension;
    validate_window(window, dimension);
    if (static_cast<int>(pinned.size()) != dimension) {
        throw std::invalid_argument("level grid: pinned state has the wrong dimension");
    }
    if (coeffs.size() != transform.size()) throw std::invalid_argument("level grid: coefficient size mismatch");
    if (assets < 1 || assets > dimension) throw std::invalid_argument("level grid: asset count out of range");

    LevelGrid grid;
    grid.window = window;
    grid.values.resize(static_cast<std::size_t>(window.nx) * static_cast<std::size_t>(window.ny));
    std::vector<double> state(pinned.begin(), pinned.end());
    for (int iy = 0; iy < window.ny; ++iy) {
        for (int ix = 0; ix < window.nx; ++ix) {
            double t = window.t_slice;
            const auto place = [&](int axis, double value) {
                if (axis == kTimeAxis) {
                    t = value;
                } else {
                    state[static_cast<std::size_t>(axis)] = value;
                }
            };
            place(window.axis_x, grid.x(ix));
            place(window.axis_y, grid.y(iy));
            double rate = 0.0;
            if (payoff_value(payoff, std::span<const double>(state.data(), static_cast<std::size_t>(assets))) > 0.0) {
                const double exponent = coeffs.dot(transform.evaluate(t, state));
                rate = std::exp(std::clamp(exponent, -kRateExponentClamp, kRateExponentClamp));
            }
            grid.values[static_cast<std::size_t>(iy) * static_cast<std::size_t>(window.nx) +
                        static_cast<std::size_t>(ix)] = rate;
        }
    }
    return grid;
}

int count_components(const LevelGrid& grid, double threshold) {
    const int nx = grid.window.nx;
    const int ny = grid.window.ny;
    std::vector<int> label(grid.values.size(), 0);
    std::vector<std::pair<int, int>> stack;
    int components = 0;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const auto idx = static_cast<std::size_t>(iy * nx + ix);
            if (label[idx] || grid.values[idx] < threshold) continue;
            ++components;
            label[idx] = components;
            stack.push_back({ix, iy});
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                const int dx[] = {1, -1, 0, 0};
                const int dy[] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int px = cx + dx[k];
                    const int py = cy + dy[k];
                    if (px < 0 || py < 0 || px >= nx || py >= ny) continue;
                    const auto pidx = static_cast<std::size_t>(py * nx + px);
                    if (label[pidx] || grid.values[pidx] < threshold) continue;
                    label[pidx] = components;
                    stack.push_back({px, py});
                }
            }
        }
    }
    return components;
}

double axis_swap_asymmetry(const LevelGrid& grid) {
    const auto& w = grid.window;
    if (w.nx != w.ny || w.x_lo != w.y_lo || w.x_hi != w.y_hi) {
        throw std::invalid_argument("asymmetry: grid must be square with equal axis ranges");
    }
    double worst = 0.0;
    double scale = 0.0;
    for (int iy = 0; iy < w.ny; ++iy) {
        for (int ix = 0; ix < w.nx; ++ix) {
            const double a = grid.at(ix, iy);
            const double b = grid.at(iy, ix);
            if (a <= 0.0 || b <= 0.0) continue;
            worst = std::max(worst, std::abs(std::log(a) - std::log(b)));
            scale = std::max(scale, std::abs(std::log(a)));
        }
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

void write_level_grid(const LevelGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const auto& w = grid.window;
    out.precision(17);
    out << "# bounds " << w.x_lo << ' ' << w.x_hi << ' ' << w.y_lo << ' ' << w.y_hi << '\n';
    out << "# resolution " << w.nx << ' ' << w.ny << '\n';
    out << "# t_slice " << w.t_slice << '\n';
    for (int iy = 0; iy < w.ny; ++iy) {
        for (int ix = 0; ix < w.nx; ++ix) {
            if (ix) out << ' ';
            out << grid.at(ix, iy);
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

LevelGrid read_level_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    LevelGrid grid;
    auto& w = grid.window;
    std::string line;
    std::string hash;
    std::string key;
    const auto header = [&](const char* expected) {
        if (!std::getline(in, line)) throw std::invalid_argument("level grid: truncated header");
        std::istringstream ss(line);
        ss >> hash >> key;
        if (hash != "#" || key != expected) throw std::invalid_argument("level grid: expected '# " + std::string(expected) + "'");
        return ss;
    };
    {
        auto ss = header("bounds");
        ss >> w.x_lo >> w.x_hi >> w.y_lo >> w.y_hi;
    }
    {
        auto ss = header("resolution");
        ss >> w.nx >> w.ny;
    }
    {
        auto ss = header("t_slice");
        ss >> w.t_slice;
    }
    if (w.nx < 1 || w.ny < 1) throw std::invalid_argument("level grid: bad resolution");
    grid.values.reserve(static_cast<std::size_t>(w.nx) * static_cast<std::size_t>(w.ny));
    double v;
    while (in >> v) grid.values.push_back(v);
    if (grid.values.size() != static_cast<std::size_t>(w.nx) * static_cast<std::size_t>(w.ny)) {
        throw std::invalid_argument("level grid: value count does not match the resolution");
    }
    return grid;
}

}  // namespace ero
