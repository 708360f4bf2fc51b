#ifndef FRONTLAB_FLOW_HPP
#define FRONTLAB_FLOW_HPP

#include <cmath>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "frontlab/grid.hpp"

namespace frontlab {

enum class FlowKind { Shear, Cellular, StreamSampled };

/** Stream-function samples on one x-period: nodes at (x0 + i*dx, j*dy),
 *  i = 0..nx-1 (column nx wraps to 0), j = 0..ny. */
struct StreamSample {
    int nx = 0, ny = 0;
    double dx = 0.0, dy = 0.0;
    double x0 = 0.0;
    double amplitude = 0.0;  // velocity scale U with |grad(psi/(U*H))| <= 1/H
    double H = 0.0;          // strip height
    std::vector<double> psi; // (ny+1) per column, column-major in x

    double at(int i, int j) const {
        int iw = ((i % nx) + nx) % nx;
        return psi[static_cast<std::size_t>(iw) * (ny + 1) + j];
    }
    double period() const { return nx * dx; }
};

/** An incompressible advection field on the strip.
 *
 * Shear carries a y-profile with zero mean; Cellular is the vortex array
 * psi = U*Hc*sin(x/Hc)*sin(y/Hc) on a strip of height pi*Hc; StreamSampled
 * wraps tabulated psi. The solver derives its staggered face velocities from
 * psi differences so the discrete divergence vanishes identically.
 */
struct FlowSpec {
    FlowKind kind = FlowKind::Shear;
    double strip_height = 0.0;

    // shear
    std::function<double(double)> shear_u;  // mean-removed profile
    bool mean_was_removed = false;

    // cellular
    double U = 0.0;       // amplitude
    double cell_H = 0.0;  // cell scale; strip height = pi * cell_H

    // sampled stream function
    StreamSample sample;

    double max_speed = 0.0;  // sup |u| component-wise, for CFL

    bool has_stream_function() const { return kind != FlowKind::Shear; }

    /** Stream function value; for shear flows the implied psi(y) with psi(0)=0. */
    double stream(double x, double y) const;
    /** Analytic (or bilinearly interpolated) velocity at a point. */
    std::pair<double, double> velocity(double x, double y) const;
};

namespace detail {

inline double bilinear_psi(const StreamSample& s, double x, double y) {
    double fx = (x - s.x0) / s.dx;
    double fy = y / s.dy;
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    j = std::clamp(j, 0, s.ny - 1);
    double ax = fx - i, ay = fy - j;
    double p00 = s.at(i, j), p10 = s.at(i + 1, j);
    double p01 = s.at(i, j + 1), p11 = s.at(i + 1, j + 1);
    return (1 - ax) * ((1 - ay) * p00 + ay * p01) + ax * ((1 - ay) * p10 + ay * p11);
}

}  // namespace detail

inline double FlowSpec::stream(double x, double y) const {
    switch (kind) {
        case FlowKind::Cellular:
            return U * cell_H * std::sin(x / cell_H) * std::sin(y / cell_H);
        case FlowKind::StreamSampled:
            return detail::bilinear_psi(sample, x, y);
        case FlowKind::Shear: {
            // psi(y) = int_0^y u, by composite midpoint on a fine mesh
            const int n = 512;
            double h = y / n, acc = 0.0;
            for (int i = 0; i < n; ++i) acc += shear_u((i + 0.5) * h) * h;
            return acc;
        }
    }
    return 0.0;
}

inline std::pair<double, double> FlowSpec::velocity(double x, double y) const {
    if (y < -1e-12 || y > strip_height + 1e-12)
        throw std::invalid_argument("sample_velocity: y outside strip");
    switch (kind) {
        case FlowKind::Shear:
            return {shear_u(std::clamp(y, 0.0, strip_height)), 0.0};
        case FlowKind::Cellular:
            return {U * std::sin(x / cell_H) * std::cos(y / cell_H),
                    -U * std::cos(x / cell_H) * std::sin(y / cell_H)};
        case FlowKind::StreamSampled: {
            // central differences of tabulated psi, second order
            double hx = 0.5 * sample.dx, hy = 0.5 * sample.dy;
            double yl = std::max(y - hy, 0.0), yh = std::min(y + hy, strip_height);
            double u = (detail::bilinear_psi(sample, x, yh) -
                        detail::bilinear_psi(sample, x, yl)) / (yh - yl);
            double v = -(detail::bilinear_psi(sample, x + hx, y) -
                         detail::bilinear_psi(sample, x - hx, y)) / (2 * hx);
            return {u, v};
        }
    }
    return {0.0, 0.0};
}

inline std::pair<double, double> sample_velocity(const FlowSpec& f, double x, double y) {
    return f.velocity(x, y);
}

inline FlowSpec shear_flow(std::function<double(double)> profile, double H) {
    if (!(H > 0.0)) throw std::invalid_argument("shear_flow: H must be > 0");
    const int n = 1 << 14;
    double mean = 0.0, amax = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = profile((i + 0.5) * H / n);
        if (!std::isfinite(v)) throw std::invalid_argument("shear_flow: non-finite profile sample");
        mean += v;
        amax = std::max(amax, std::abs(v));
    }
    mean /= n;
    FlowSpec f;
    f.kind = FlowKind::Shear;
    f.strip_height = H;
    if (std::abs(mean) > 1e-12) {
        std::cerr << "[frontlab] shear_flow: removing nonzero x-average "
                  << mean << " from profile\n";
        f.mean_was_removed = true;
        f.shear_u = [profile, mean](double y) { return profile(y) - mean; };
    } else {
        f.shear_u = std::move(profile);
    }
    f.max_speed = amax + std::abs(mean);
    return f;
}

/** Cellular vortex array (stream0): u = U(sin(x/H)cos(y/H), -cos(x/H)sin(y/H)),
 *  psi = U*H*sin(x/H)*sin(y/H); the strip height is pi*H. */
inline FlowSpec cellular_flow(double U, double H) {
    if (U < 0.0) throw std::invalid_argument("cellular_flow: U must be >= 0");
    if (!(H > 0.0)) throw std::invalid_argument("cellular_flow: H must be > 0");
    FlowSpec f;
    f.kind = FlowKind::Cellular;
    f.U = U;
    f.cell_H = H;
    f.strip_height = M_PI * H;
    f.max_speed = U;
    return f;
}

inline FlowSpec sampled_stream_flow(StreamSample s) {
    if (s.nx < 4 || s.ny < 4)
        throw std::invalid_argument("sampled_stream_flow: sample too coarse");
    FlowSpec f;
    f.kind = FlowKind::StreamSampled;
    f.strip_height = s.ny * s.dy;
    f.sample = std::move(s);
    double amax = 0.0;
    for (int i = 0; i < f.sample.nx; ++i)
        for (int j = 0; j <= f.sample.ny; ++j) {
            double du = (f.sample.at(i, std::min(j + 1, f.sample.ny)) -
                         f.sample.at(i, std::max(j - 1, 0))) /
                        ((std::min(j + 1, f.sample.ny) - std::max(j - 1, 0)) * f.sample.dy);
            double dv = (f.sample.at(i + 1, j) - f.sample.at(i - 1, j)) / (2 * f.sample.dx);
            amax = std::max(amax, std::max(std::abs(du), std::abs(dv)));
        }
    f.max_speed = amax;
    return f;
}

/** max over x of |integral of u1 over the strip height| (mean-zero residual). */
inline double check_mean_zero(const FlowSpec& f) {
    const int ny = 1 << 13;
    const int nxs = (f.kind == FlowKind::Shear) ? 1 : 64;
    double xspan = (f.kind == FlowKind::Cellular) ? 2 * M_PI * f.cell_H
                 : (f.kind == FlowKind::StreamSampled) ? f.sample.period()
                                                       : 1.0;
    double worst = 0.0;
    for (int k = 0; k < nxs; ++k) {
        double x = (k + 0.31) * xspan / nxs;
        double acc = 0.0, h = f.strip_height / ny;
        for (int j = 0; j < ny; ++j) {
            acc += f.velocity(x, (j + 0.5) * h).first * h;
        }
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Staggered face velocities
//
// u lives on x-faces (nx+1 per row), v on y-faces (ny+1 per column), both
// derived from psi at cell corners: u = d(psi)/dy, v = -d(psi)/dx. Built-in
// analytic flows factor into 1-D tables (u_face = fx[i]*fy[j]); tabulated
// psi falls back to dense arrays. Discrete divergence telescopes to zero.
// ---------------------------------------------------------------------------

struct SeparableFaces {
    int nx = 0, ny = 0;
    std::vector<double> fx, fy;  // u_face(i,j) = fx[i] * fy[j], i in [0,nx]
    std::vector<double> gx, gy;  // v_face(i,j) = gx[i] * gy[j], j in [0,ny]

    double ux(int iface, int j) const { return fx[iface] * fy[j]; }
    double vy(int i, int jface) const { return gx[i] * gy[jface]; }
};

struct DenseFaces {
    int nx = 0, ny = 0;
    std::vector<double> uf;  // (nx+1) x ny
    std::vector<double> vf;  // nx x (ny+1)

    double ux(int iface, int j) const {
        return uf[static_cast<std::size_t>(iface) * ny + j];
    }
    double vy(int i, int jface) const {
        return vf[static_cast<std::size_t>(i) * (ny + 1) + jface];
    }
};

/** Build separable face tables for shear/cellular flows on a window whose
 *  absolute x starts at grid.x_lo + offset. */
inline SeparableFaces build_separable_faces(const FlowSpec& f, const Grid& g,
                                            double offset) {
    SeparableFaces t;
    t.nx = g.nx;
    t.ny = g.ny;
    t.fx.assign(g.nx + 1, 0.0);
    t.fy.assign(g.ny, 0.0);
    t.gx.assign(g.nx, 0.0);
    t.gy.assign(g.ny + 1, 0.0);
    if (f.kind == FlowKind::Shear) {
        for (int i = 0; i <= g.nx; ++i) t.fx[i] = 1.0;
        // cell average of u from psi(y) node differences keeps the column
        // fluxes consistent with the profile integral
        std::vector<double> psin(g.ny + 1);
        for (int j = 0; j <= g.ny; ++j) psin[j] = f.stream(0.0, j * g.dy);
        for (int j = 0; j < g.ny; ++j) t.fy[j] = (psin[j + 1] - psin[j]) / g.dy;
        // gx, gy stay zero
    } else if (f.kind == FlowKind::Cellular) {
        const double Hc = f.cell_H, UH = f.U * Hc;
        for (int i = 0; i <= g.nx; ++i)
            t.fx[i] = std::sin((g.x_lo + offset + i * g.dx) / Hc);
        for (int j = 0; j < g.ny; ++j)
            t.fy[j] = UH * (std::sin((j + 1) * g.dy / Hc) - std::sin(j * g.dy / Hc)) / g.dy;
        for (int i = 0; i < g.nx; ++i)
            t.gx[i] = -UH * (std::sin((g.x_lo + offset + (i + 1) * g.dx) / Hc) -
                             std::sin((g.x_lo + offset + i * g.dx) / Hc)) / g.dx;
        for (int j = 0; j <= g.ny; ++j) t.gy[j] = std::sin(j * g.dy / Hc);
    } else {
        throw std::invalid_argument("build_separable_faces: flow is not separable");
    }
    return t;
}

inline DenseFaces build_dense_faces(const FlowSpec& f, const Grid& g, double offset) {
    DenseFaces t;
    t.nx = g.nx;
    t.ny = g.ny;
    t.uf.assign(static_cast<std::size_t>(g.nx + 1) * g.ny, 0.0);
    t.vf.assign(static_cast<std::size_t>(g.nx) * (g.ny + 1), 0.0);
    std::vector<double> psin(static_cast<std::size_t>(g.nx + 1) * (g.ny + 1));
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j <= g.ny; ++j)
            psin[static_cast<std::size_t>(i) * (g.ny + 1) + j] =
                f.stream(g.x_lo + offset + i * g.dx, j * g.dy);
    auto pn = [&](int i, int j) {
        return psin[static_cast<std::size_t>(i) * (g.ny + 1) + j];
    };
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            t.uf[static_cast<std::size_t>(i) * g.ny + j] = (pn(i, j + 1) - pn(i, j)) / g.dy;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j <= g.ny; ++j)
            t.vf[static_cast<std::size_t>(i) * (g.ny + 1) + j] = -(pn(i + 1, j) - pn(i, j)) / g.dx;
    return t;
}

/** Max |discrete divergence| of the staggered face field on the grid. */
template <class Faces>
double max_divergence(const Faces& t, const Grid& g) {
    double worst = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            double div = (t.ux(i + 1, j) - t.ux(i, j)) / g.dx +
                         (t.vy(i, j + 1) - t.vy(i, j)) / g.dy;
            worst = std::max(worst, std::abs(div));
        }
    return worst;
}

inline double check_divergence(const FlowSpec& f, const Grid& g) {
    if (f.kind == FlowKind::StreamSampled)
        return max_divergence(build_dense_faces(f, g, 0.0), g);
    return max_divergence(build_separable_faces(f, g, 0.0), g);
}

}  // namespace frontlab

#endif
