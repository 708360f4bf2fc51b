#ifndef FRONTLAB_GRID_HPP
#define FRONTLAB_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace frontlab {

enum class BoundaryY { Neumann, Periodic };

/** Cell-centered uniform grid on a truncated strip window.
 *
 * The strip is R x [0,H]; the window covers [x_lo, x_hi] with Dirichlet-like
 * closures (left pinned to 1, right to 0). Cell centers sit at
 * x_lo + (i+1/2)*dx, (j+1/2)*dy. Window coordinates are absolute minus the
 * accumulated window offset carried by the field.
 */
struct Grid {
    double H = 0.0;   // strip height
    int ny = 0;
    double x_lo = 0.0;
    double x_hi = 0.0;
    int nx = 0;
    BoundaryY bc_y = BoundaryY::Neumann;
    double dx = 0.0;
    double dy = 0.0;

    std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
    double x_center(int i) const { return x_lo + (i + 0.5) * dx; }
    double y_center(int j) const { return (j + 0.5) * dy; }
    // y-neighbor row index under the configured boundary condition
    int y_row(int j) const {
        if (bc_y == BoundaryY::Periodic) return ((j % ny) + ny) % ny;
        if (j < 0) return -j - 1;          // mirror: ghost below 0 copies row 0
        if (j >= ny) return 2 * ny - 1 - j;
        return j;
    }
};

inline Grid build_grid(double H, int ny, double x_lo, double x_hi, int nx,
                       BoundaryY bc_y) {
    if (!(H > 0.0)) throw std::invalid_argument("build_grid: H must be > 0");
    if (!(x_hi > x_lo))
        throw std::invalid_argument("build_grid: x_hi must exceed x_lo");
    if (nx < 8) throw std::invalid_argument("build_grid: nx must be >= 8");
    if (ny < 8) throw std::invalid_argument("build_grid: ny must be >= 8");
    Grid g;
    g.H = H;
    g.ny = ny;
    g.x_lo = x_lo;
    g.x_hi = x_hi;
    g.nx = nx;
    g.bc_y = bc_y;
    g.dx = (x_hi - x_lo) / nx;
    g.dy = H / ny;
    return g;
}

/** Temperature sample on a grid window. Values are stored column-major in x:
 *  values[i*ny + j] is the cell (i,j). The window shifts rightward with the
 *  front; window_offset accumulates the total shift so x_abs = x + offset. */
struct TemperatureField {
    Grid grid;
    std::vector<double> values;
    double t = 0.0;
    double window_offset = 0.0;

    TemperatureField() = default;
    explicit TemperatureField(const Grid& g)
        : grid(g), values(g.cells(), 0.0) {}

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.ny + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.ny + j]; }
    const double* column(int i) const { return &values[static_cast<std::size_t>(i) * grid.ny]; }
    double* column(int i) { return &values[static_cast<std::size_t>(i) * grid.ny]; }
    double x_abs(int i) const { return grid.x_center(i) + window_offset; }
};

/** Midpoint-rule integral of sel(T) over the window, divided by H. */
template <class Selector>
double integrate_over_window(const TemperatureField& f, Selector&& sel) {
    double sum = 0.0;
    for (double v : f.values) sum += sel(v);
    return sum * f.grid.dx * f.grid.dy / f.grid.H;
}

inline double window_mass(const TemperatureField& f) {
    return integrate_over_window(f, [](double v) { return v; });
}

/** Shift the window so the front keeps clear of the right closure.
 *
 * Triggered when the rightmost 10% of columns sees values above the
 * threshold; contents move left by a whole number of cells, dropped left
 * columns are accounted to window_offset, vacated right columns fill with 0.
 * Returns the number of cells shifted (0 when the trigger is not met).
 */
inline int shift_window(TemperatureField& f, double right_tail_threshold) {
    if (!(right_tail_threshold > 0.0 && right_tail_threshold < 1.0))
        throw std::invalid_argument("shift_window: threshold must be in (0,1)");
    const Grid& g = f.grid;
    const int guard = std::max(1, g.nx / 10);
    double tail_max = 0.0;
    for (int i = g.nx - guard; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) tail_max = std::max(tail_max, f.at(i, j));
    if (tail_max <= right_tail_threshold) return 0;

    // locate the rightmost column whose maximum exceeds the threshold and
    // recenter it at 55% of the window, keeping >= 20% margins
    int front_col = g.nx - 1;
    for (int i = g.nx - 1; i >= 0; --i) {
        double m = 0.0;
        for (int j = 0; j < g.ny; ++j) m = std::max(m, f.at(i, j));
        if (m > right_tail_threshold) { front_col = i; break; }
    }
    int target = static_cast<int>(0.55 * g.nx);
    int shift = front_col - target;
    // never pull the burned core (max > 1/2) closer than 25% to the left closure
    int core_col = 0;
    for (int i = g.nx - 1; i >= 0; --i) {
        double m = 0.0;
        for (int j = 0; j < g.ny; ++j) m = std::max(m, f.at(i, j));
        if (m > 0.5) { core_col = i; break; }
    }
    shift = std::min(shift, core_col - static_cast<int>(0.25 * g.nx));
    if (shift <= 0) return 0;
    shift = std::min(shift, g.nx - 1);

    std::move(f.values.begin() + static_cast<std::size_t>(shift) * g.ny,
              f.values.end(), f.values.begin());
    std::fill(f.values.end() - static_cast<std::size_t>(shift) * g.ny,
              f.values.end(), 0.0);
    f.window_offset += shift * g.dx;
    return shift;
}

}  // namespace frontlab

#endif
