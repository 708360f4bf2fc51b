#ifndef FRONTLAB_DIAGNOSTICS_HPP
#define FRONTLAB_DIAGNOSTICS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "frontlab/cell_geometry.hpp"
#include "frontlab/flow.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/reaction.hpp"

namespace frontlab {

/** One time sample of the measurable quantities. */
struct DiagnosticsRecord {
    double t = 0.0;
    double V_reaction = 0.0;   // (v0^2/kappa) int f(T) dxdy / H
    double V_mass = 0.0;       // corrected mass rate
    double avg_V = 0.0;        // running time average of V_reaction
    double grad_energy = 0.0;  // kappa int |grad T|^2 dxdy / H
    double front_x = 0.0;      // absolute front position (NaN when undefined)
    double min_T = 0.0, max_T = 0.0;
};

inline double burning_rate_reaction(const TemperatureField& f, double kappa,
                                    double v0, const ReactionSpec& r) {
    double R0 = v0 * v0 / kappa;
    return R0 * integrate_over_window(f, [&](double T) { return r.evaluate(T); });
}

/** kappa * int |grad T|^2 dxdy / H with central differences; the x-closures
 *  enter through the pinned ghost columns, y through the BC ghosts. */
inline double gradient_energy(const TemperatureField& f, double kappa) {
    const Grid& g = f.grid;
    double sum = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        // central differences; one-sided at the window edge columns
        const double* cm = f.column(std::max(i - 1, 0));
        const double* cc = f.column(i);
        const double* cp = f.column(std::min(i + 1, g.nx - 1));
        double hx = (i == 0 || i == g.nx - 1) ? g.dx : 2.0 * g.dx;
        for (int j = 0; j < g.ny; ++j) {
            double s = cc[g.y_row(j - 1)];
            double n = cc[g.y_row(j + 1)];
            double tx = (cp[j] - cm[j]) / hx;
            double ty = (n - s) / (2.0 * g.dy);
            sum += tx * tx + ty * ty;
        }
    }
    return kappa * sum * g.dx * g.dy / g.H;
}

/** Bulk burning rate from the mass difference of two fields dt apart, with
 *  the diffusive and advective closure fluxes added back so the Lemma-1
 *  identity is testable on a truncated window. */
inline double burning_rate_mass(const TemperatureField& prev,
                                const TemperatureField& next, double dt,
                                double kappa, const FlowSpec& flow) {
    const Grid& g = prev.grid;
    if (next.grid.nx != g.nx || next.grid.ny != g.ny ||
        next.window_offset != prev.window_offset)
        throw std::invalid_argument("burning_rate_mass: mismatched windows");
    if (!(dt > 0.0)) throw std::invalid_argument("burning_rate_mass: dt must be > 0");

    double dm = (window_mass(next) - window_mass(prev)) / dt;

    // net inflow through the x-closures, evaluated at the interval midpoint
    auto inflow = [&](const TemperatureField& f) {
        double acc = 0.0;
        double xl = g.x_lo + f.window_offset, xr = g.x_hi + f.window_offset;
        for (int j = 0; j < g.ny; ++j) {
            double y = g.y_center(j);
            double Tl = f.at(0, j), Tr = f.at(g.nx - 1, j);
            double ul = flow.velocity(xl, y).first;
            double ur = flow.velocity(xr, y).first;
            // diffusion against the pinned ghosts, upwind advective flux
            acc += kappa * ((1.0 - Tl) / g.dx - Tr / g.dx) * g.dy;
            acc += (std::max(ul, 0.0) * 1.0 + std::min(ul, 0.0) * Tl) * g.dy;
            acc -= (std::max(ur, 0.0) * Tr + std::min(ur, 0.0) * 0.0) * g.dy;
        }
        return acc / g.H;
    };
    double corr = 0.5 * (inflow(prev) + inflow(next));
    return dm - corr;
}

/** Trapezoidal time average of V_reaction over the records up to the last. */
inline double time_average_V(const std::vector<DiagnosticsRecord>& recs) {
    if (recs.empty()) throw std::invalid_argument("time_average_V: empty series");
    if (recs.size() == 1) return recs[0].V_reaction;
    double acc = 0.0;
    for (std::size_t i = 1; i < recs.size(); ++i)
        acc += 0.5 * (recs[i].V_reaction + recs[i - 1].V_reaction) *
               (recs[i].t - recs[i - 1].t);
    double span = recs.back().t - recs.front().t;
    if (!(span > 0.0)) return recs.back().V_reaction;
    return acc / span;
}

/** Largest absolute x where the y-averaged profile crosses the level. */
inline double front_position(const TemperatureField& f, double level = 0.5) {
    const Grid& g = f.grid;
    std::vector<double> prof(g.nx);
    for (int i = 0; i < g.nx; ++i) {
        double s = 0.0;
        const double* col = f.column(i);
        for (int j = 0; j < g.ny; ++j) s += col[j];
        prof[i] = s / g.ny;
    }
    for (int i = g.nx - 1; i >= 1; --i) {
        if ((prof[i - 1] - level) * (prof[i] - level) <= 0.0 && prof[i - 1] != prof[i]) {
            double fr = (prof[i - 1] - level) / (prof[i - 1] - prof[i]);
            return g.x_center(i - 1) + fr * g.dx + f.window_offset;
        }
    }
    throw std::runtime_error("front_position: profile does not cross the level");
}

struct FrontSpeed {
    double c = 0.0;
    double stderr_c = 0.0;
    int n_used = 0;
};

/** Least-squares slope of front_x vs t over the last tail_fraction samples. */
inline FrontSpeed front_speed(const std::vector<DiagnosticsRecord>& recs,
                              double tail_fraction = 0.5) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : recs)
        if (std::isfinite(r.front_x)) pts.emplace_back(r.t, r.front_x);
    std::size_t n = pts.size();
    std::size_t start = static_cast<std::size_t>(std::floor(n * (1.0 - tail_fraction)));
    if (n - start < 10)
        throw std::invalid_argument("front_speed: needs >= 10 samples in the tail");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = n - start;
    for (std::size_t i = start; i < n; ++i) {
        sx += pts[i].first;
        sy += pts[i].second;
        sxx += pts[i].first * pts[i].first;
        sxy += pts[i].first * pts[i].second;
    }
    double denom = m * sxx - sx * sx;
    FrontSpeed out;
    out.n_used = static_cast<int>(m);
    out.c = (m * sxy - sx * sy) / denom;
    double intercept = (sy - out.c * sx) / m;
    double ss = 0.0;
    for (std::size_t i = start; i < n; ++i) {
        double e = pts[i].second - (intercept + out.c * pts[i].first);
        ss += e * e;
    }
    if (m > 2) out.stderr_c = std::sqrt(ss / (m - 2) / (sxx - sx * sx / m));
    return out;
}

/** Tent kernel G(h, xi) = max(0, 1 - |xi|/h). */
inline double kernel_G(double h, double xi) {
    double a = std::abs(xi) / h;
    return a >= 1.0 ? 0.0 : 1.0 - a;
}

/** int G(h, y - c) p(y) dy by dense midpoint quadrature on the support. */
inline double kernel_average_G(const std::function<double(double)>& p, double c,
                               double h, int n = 20000) {
    if (!(h > 0.0)) throw std::invalid_argument("kernel_average_G: h must be > 0");
    double acc = 0.0, dy = 2.0 * h / n;
    for (int i = 0; i < n; ++i) {
        double y = c - h + (i + 0.5) * dy;
        acc += kernel_G(h, y - c) * p(y) * dy;
    }
    return acc;
}

/** Bilinear sample of the field at an absolute point (clamped to the window). */
inline double sample_field_abs(const TemperatureField& f, double x_abs, double y) {
    const Grid& g = f.grid;
    double fx = (x_abs - f.window_offset - g.x_lo) / g.dx - 0.5;
    double fy = y / g.dy - 0.5;
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    double ax = fx - i, ay = fy - j;
    auto val = [&](int ii, int jj) -> double {
        jj = g.y_row(std::clamp(jj, -1, g.ny));
        if (ii < 0) return 1.0;
        if (ii >= g.nx) return 0.0;
        return f.at(ii, jj);
    };
    return (1 - ax) * ((1 - ay) * val(i, j) + ay * val(i, j + 1)) +
           ax * ((1 - ay) * val(i + 1, j) + ay * val(i + 1, j + 1));
}

struct InterfaceAverages {
    double left = 0.0;   // <T>_{2n}: band hugging the cell's left interface
    double right = 0.0;  // <T>_{2n+1}: band hugging the right interface
};

/** Weighted temperature averages over the boundary-layer bands of cell n:
 *  <T> = (1/(2AF)) int int k(rho) T drho dxi with k(rho) = U G(h, rho - 2h),
 *  rho in [h, 3h], xi within A of the interface ray (wrapping by the cell's
 *  mirror symmetry). Evaluated by marching each rho-level once. */
inline InterfaceAverages cell_interface_averages(const TemperatureField& f,
                                                 const FlowSpec& flow, int cell_n,
                                                 double h, double A,
                                                 int n_rho = 16, int n_xi = 48) {
    if (flow.kind != FlowKind::Cellular)
        throw std::invalid_argument("cell_interface_averages: flow must be cellular");
    double Hc = flow.cell_H;
    if (!(h > 0.0 && h <= Hc / 6.0))
        throw std::invalid_argument("cell_interface_averages: need 0 < h <= H/6");
    CellChart chart;
    chart.H = Hc;
    chart.x0 = cell_n * M_PI * Hc;
    chart.y0 = 0.0;

    double mirror_y = chart.y0 + M_PI * Hc;
    double wsum = 0.0, acc_left = 0.0, acc_right = 0.0;
    for (int a = 0; a < n_rho; ++a) {
        double r = h + (a + 0.5) * 2.0 * h / n_rho;
        double k = kernel_G(h, r - 2.0 * h);  // amplitude U cancels in the ratio
        if (k <= 0.0) continue;
        Streamline s = trace_streamline(chart, r, 0, true);
        double L = s.L_xi;
        auto point_at_xi = [&](double xiv) -> Vec2 {
            // fold into [0, L] using the cell's y-mirror symmetry
            bool mirrored = false;
            double x = std::fmod(xiv, 2.0 * L);
            if (x < 0) x += 2.0 * L;
            if (x > L) {
                x = 2.0 * L - x;
                mirrored = true;
            }
            auto it = std::lower_bound(s.xi.begin(), s.xi.end(), x);
            std::size_t i = std::min<std::size_t>(
                std::max<std::ptrdiff_t>(1, it - s.xi.begin()), s.points.size() - 1);
            double a0 = s.xi[i - 1], a1 = s.xi[i];
            double fr = (a1 > a0) ? (x - a0) / (a1 - a0) : 0.0;
            Vec2 p = {s.points[i - 1].x + fr * (s.points[i].x - s.points[i - 1].x),
                      s.points[i - 1].y + fr * (s.points[i].y - s.points[i - 1].y)};
            if (mirrored) p.y = mirror_y - (p.y - chart.y0);
            return p;
        };
        for (int b = 0; b < n_xi; ++b) {
            double xiv = -A + (b + 0.5) * 2.0 * A / n_xi;
            Vec2 pl = point_at_xi(xiv);        // around xi = 0 (left interface)
            Vec2 pr = point_at_xi(L + xiv);    // around xi = L (right interface)
            double w = k;
            acc_left += w * sample_field_abs(f, pl.x, pl.y);
            acc_right += w * sample_field_abs(f, pr.x, pr.y);
            wsum += w;
        }
    }
    InterfaceAverages out;
    out.left = acc_left / wsum;
    out.right = acc_right / wsum;
    return out;
}

}  // namespace frontlab

#endif
