#ifndef FRONTLAB_SOLVER_HPP
#define FRONTLAB_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include "frontlab/flow.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/reaction.hpp"

namespace frontlab {

struct SolverConfig {
    double kappa = 1.0;  // diffusivity
    double v0 = 1.0;     // laminar speed scale
    ReactionSpec reaction;
    FlowSpec flow;
    double cfl_safety = 0.9;

    double reaction_rate() const { return v0 * v0 / kappa; }
    double laminar_width() const { return kappa / v0; }
};

/** Largest admissible time step: diffusion, advection and reaction limits,
 *  each on the finer spacing, scaled by cfl_safety. */
inline double stable_dt(const SolverConfig& c, const Grid& g) {
    if (!(c.kappa > 0.0 && c.v0 > 0.0))
        throw std::invalid_argument("stable_dt: kappa and v0 must be > 0");
    double m = std::min(g.dx, g.dy);
    double dt = m * m / (4.0 * c.kappa);
    double umax = c.flow.max_speed;
    if (umax > 0.0) dt = std::min(dt, m / (2.0 * umax));
    if (c.reaction.Lf > 0.0)
        dt = std::min(dt, 0.2 * c.kappa / (c.v0 * c.v0 * c.reaction.Lf));
    return c.cfl_safety * dt;
}

/** Sigmoid front 1/(1+e^{lambda(x-x_front)}), uniform in y; satisfies the
 *  exponential decay conditions with rate lambda. */
inline TemperatureField make_front_initial_data(const Grid& g, double lambda,
                                                double x_front) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("make_front_initial_data: lambda must be > 0");
    double W = g.x_hi - g.x_lo;
    double margin = std::max(0.05 * W, 14.0 / lambda);
    if (x_front - g.x_lo < margin || g.x_hi - x_front < margin)
        throw std::invalid_argument(
            "make_front_initial_data: x_front too close to a window closure");
    TemperatureField f(g);
    for (int i = 0; i < g.nx; ++i) {
        double e = std::exp(lambda * (g.x_center(i) - x_front));
        double v = 1.0 / (1.0 + e);
        double* col = f.column(i);
        for (int j = 0; j < g.ny; ++j) col[j] = v;
    }
    return f;
}

struct StepStats {
    double raw_min = 0.0;  // extremes before the final clamp
    double raw_max = 1.0;
};

namespace kernel {

// Per-cell pieces shared by the fused kernel and the reference path so the
// two produce bit-identical results.

template <class RF>
inline double react_half(double v, double a, double b, const RF& f) {
    // explicit midpoint for dT/dt = R0 f(T) over dt/2: a = dt*R0/4, b = dt*R0/2
    double vm = v + a * f(v);
    return v + b * f(vm);
}

inline double advect_cell(double aw, double ac, double ae, double as, double an,
                          double uw, double ue, double vs, double vn,
                          double rx, double ry) {
    double fw = std::max(uw, 0.0) * aw + std::min(uw, 0.0) * ac;
    double fe = std::max(ue, 0.0) * ac + std::min(ue, 0.0) * ae;
    double fs = std::max(vs, 0.0) * as + std::min(vs, 0.0) * ac;
    double fn = std::max(vn, 0.0) * ac + std::min(vn, 0.0) * an;
    return ac - ((fe - fw) * rx + (fn - fs) * ry);
}

inline double diffuse_cell(double bw, double bc, double be, double bs, double bn,
                           double cx2, double cy2) {
    return bc + (cx2 * (bw + be - 2.0 * bc) + cy2 * (bs + bn - 2.0 * bc));
}

struct LogisticF {
    double operator()(double T) const {
        return (T <= 0.0 || T >= 1.0) ? 0.0 : T * (1.0 - T);
    }
};
struct IgnitionF {
    double theta0, inv_eps;
    double operator()(double T) const {
        if (T <= theta0 || T >= 1.0) return 0.0;
        double s = std::min(1.0, (T - theta0) * inv_eps);
        return (1.0 - T) * s * s * (3.0 - 2.0 * s);
    }
};
struct ArrheniusF {
    double A, p;
    double operator()(double T) const {
        return (T <= 0.0 || T >= 1.0) ? 0.0 : p * (1.0 - T) * std::exp(-A / T);
    }
};

inline void fill_ghosts(double* col, int ny, BoundaryY bc) {
    if (bc == BoundaryY::Periodic) {
        col[0] = col[ny];
        col[ny + 1] = col[1];
    } else {  // Neumann mirror
        col[0] = col[1];
        col[ny + 1] = col[ny];
    }
}

/** One Strang step: half reaction, upwind advection, 5-point diffusion, half
 *  reaction, fused into a single sweep over columns with 3-column rings. */
template <class RF, class Faces>
void strang_step_fused(TemperatureField& f, std::vector<double>& scratch,
                       const Faces& faces, const RF& rf, double kappa,
                       double R0, double dt, StepStats& stats) {
    const Grid& g = f.grid;
    const int nx = g.nx, ny = g.ny, P = ny + 2;
    const double a = 0.25 * dt * R0, b = 0.5 * dt * R0;
    const double rx = dt / g.dx, ry = dt / g.dy;
    const double cx2 = kappa * dt / (g.dx * g.dx), cy2 = kappa * dt / (g.dy * g.dy);

    scratch.resize(f.values.size());
    thread_local std::vector<double> rb, bb, ones, zeros;
    rb.assign(3 * P, 0.0);
    bb.assign(3 * P, 0.0);
    ones.assign(P, 1.0);
    zeros.assign(P, 0.0);

    auto rptr = [&](int ix) -> const double* {
        if (ix < 0) return ones.data();
        if (ix >= nx) return zeros.data();
        return &rb[static_cast<std::size_t>(ix % 3) * P];
    };
    auto bptr = [&](int ix) -> const double* {
        if (ix < 0) return ones.data();
        if (ix >= nx) return zeros.data();
        return &bb[static_cast<std::size_t>(ix % 3) * P];
    };
    auto make_rcol = [&](int ix) {
        const double* __restrict src = f.column(ix);
        double* __restrict dst = &rb[static_cast<std::size_t>(ix % 3) * P];
        for (int j = 0; j < ny; ++j) dst[j + 1] = react_half(src[j], a, b, rf);
        fill_ghosts(dst, ny, g.bc_y);
    };
    auto make_bcol = [&](int ix) {
        const double* __restrict rm = rptr(ix - 1);
        const double* __restrict rc = rptr(ix);
        const double* __restrict rp = rptr(ix + 1);
        double* __restrict dst = &bb[static_cast<std::size_t>(ix % 3) * P];
        for (int j = 0; j < ny; ++j) {
            dst[j + 1] = advect_cell(rm[j + 1], rc[j + 1], rp[j + 1], rc[j],
                                     rc[j + 2], faces.ux(ix, j), faces.ux(ix + 1, j),
                                     faces.vy(ix, j), faces.vy(ix, j + 1), rx, ry);
        }
        fill_ghosts(dst, ny, g.bc_y);
    };

    make_rcol(0);
    if (nx > 1) make_rcol(1);
    make_bcol(0);

    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (int ix = 0; ix < nx; ++ix) {
        if (ix + 1 < nx) {
            if (ix + 2 < nx) make_rcol(ix + 2);
            make_bcol(ix + 1);
        }
        const double* __restrict bm = bptr(ix - 1);
        const double* __restrict bc = bptr(ix);
        const double* __restrict bp = bptr(ix + 1);
        double* __restrict out = &scratch[static_cast<std::size_t>(ix) * ny];
        for (int j = 0; j < ny; ++j) {
            double v = diffuse_cell(bm[j + 1], bc[j + 1], bp[j + 1], bc[j],
                                    bc[j + 2], cx2, cy2);
            v = react_half(v, a, b, rf);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            out[j] = std::min(std::max(v, 0.0), 1.0);
        }
    }
    stats.raw_min = mn;
    stats.raw_max = mx;
    f.values.swap(scratch);
    f.t += dt;
}

// Reference path: the same composition as three whole-array passes. Kept for
// tests against the fused sweep and for the subsolution residual.

template <class RF>
void reaction_half_pass(TemperatureField& f, const RF& rf, double R0, double dt) {
    const double a = 0.25 * dt * R0, b = 0.5 * dt * R0;
    for (double& v : f.values) v = react_half(v, a, b, rf);
}

// gathers a column with x-closure ghosts (i=-1 all ones, i=nx all zeros)
inline void gather_column(const TemperatureField& f, int ix, double* col) {
    const Grid& g = f.grid;
    if (ix < 0)
        std::fill(col, col + g.ny + 2, 1.0);
    else if (ix >= g.nx)
        std::fill(col, col + g.ny + 2, 0.0);
    else {
        const double* src = f.column(ix);
        for (int j = 0; j < g.ny; ++j) col[j + 1] = src[j];
        kernel::fill_ghosts(col, g.ny, g.bc_y);
    }
}

template <class Faces>
void advect_pass(TemperatureField& f, std::vector<double>& scratch,
                 const Faces& faces, double dt) {
    const Grid& g = f.grid;
    const int nx = g.nx, ny = g.ny, P = ny + 2;
    const double rx = dt / g.dx, ry = dt / g.dy;
    scratch.resize(f.values.size());
    std::vector<double> cm(P), cc(P), cp(P);
    gather_column(f, -1, cm.data());
    gather_column(f, 0, cc.data());
    for (int ix = 0; ix < nx; ++ix) {
        gather_column(f, ix + 1, cp.data());
        double* out = &scratch[static_cast<std::size_t>(ix) * ny];
        for (int j = 0; j < ny; ++j)
            out[j] = advect_cell(cm[j + 1], cc[j + 1], cp[j + 1], cc[j], cc[j + 2],
                                 faces.ux(ix, j), faces.ux(ix + 1, j),
                                 faces.vy(ix, j), faces.vy(ix, j + 1), rx, ry);
        std::swap(cm, cc);
        std::swap(cc, cp);
    }
    f.values.swap(scratch);
}

inline void diffuse_pass(TemperatureField& f, std::vector<double>& scratch,
                         double kappa, double dt) {
    const Grid& g = f.grid;
    const int nx = g.nx, ny = g.ny, P = ny + 2;
    const double cx2 = kappa * dt / (g.dx * g.dx), cy2 = kappa * dt / (g.dy * g.dy);
    scratch.resize(f.values.size());
    std::vector<double> cm(P), cc(P), cp(P);
    gather_column(f, -1, cm.data());
    gather_column(f, 0, cc.data());
    for (int ix = 0; ix < nx; ++ix) {
        gather_column(f, ix + 1, cp.data());
        double* out = &scratch[static_cast<std::size_t>(ix) * ny];
        for (int j = 0; j < ny; ++j)
            out[j] = diffuse_cell(cm[j + 1], cc[j + 1], cp[j + 1], cc[j], cc[j + 2],
                                  cx2, cy2);
        std::swap(cm, cc);
        std::swap(cc, cp);
    }
    f.values.swap(scratch);
}

template <class RF>
void final_reaction_clamp_pass(TemperatureField& f, const RF& rf, double R0,
                               double dt, StepStats& stats) {
    const double a = 0.25 * dt * R0, b = 0.5 * dt * R0;
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (double& v : f.values) {
        double w = react_half(v, a, b, rf);
        mn = std::min(mn, w);
        mx = std::max(mx, w);
        v = std::min(std::max(w, 0.0), 1.0);
    }
    stats.raw_min = mn;
    stats.raw_max = mx;
}

}  // namespace kernel

template <class Fn>
auto with_reaction_functor(const ReactionSpec& r, Fn&& fn) {
    switch (r.kind) {
        case ReactionKind::KppLogistic:
            return fn(kernel::LogisticF{});
        case ReactionKind::Ignition:
            return fn(kernel::IgnitionF{r.theta0, 1.0 / r.epsilon});
        case ReactionKind::Arrhenius:
            return fn(kernel::ArrheniusF{r.arrhenius_A, r.prefactor});
    }
    throw std::logic_error("unknown reaction kind");
}

inline constexpr double kMaxPrincipleTol = 1e-10;

/** Owns the staggered face tables for one simulation and advances the field.
 *  Tables are rebuilt whenever the window shifts (absolute x changes). */
class Stepper {
  public:
    Stepper(const SolverConfig& config, const Grid& grid, double window_offset = 0.0)
        : config_(config), grid_(grid) {
        rebuild(window_offset);
    }

    void rebuild(double window_offset) {
        if (config_.flow.kind == FlowKind::StreamSampled)
            faces_ = build_dense_faces(config_.flow, grid_, window_offset);
        else
            faces_ = build_separable_faces(config_.flow, grid_, window_offset);
        offset_ = window_offset;
    }

    void advance(TemperatureField& f, double dt) {
        if (f.window_offset != offset_) rebuild(f.window_offset);
        StepStats st;
        with_reaction_functor(config_.reaction, [&](auto rf) {
            std::visit(
                [&](const auto& t) {
                    kernel::strang_step_fused(f, scratch_, t, rf, config_.kappa,
                                              config_.reaction_rate(), dt, st);
                },
                faces_);
        });
        enforce_max_principle(st);
        last_stats_ = st;
    }

    /** Same composition as three separate passes; for verification only. */
    void advance_reference(TemperatureField& f, double dt) {
        if (f.window_offset != offset_) rebuild(f.window_offset);
        StepStats st;
        with_reaction_functor(config_.reaction, [&](auto rf) {
            kernel::reaction_half_pass(f, rf, config_.reaction_rate(), dt);
            std::visit([&](const auto& t) { kernel::advect_pass(f, scratch_, t, dt); },
                       faces_);
            kernel::diffuse_pass(f, scratch_, config_.kappa, dt);
            kernel::final_reaction_clamp_pass(f, rf, config_.reaction_rate(), dt, st);
        });
        f.t += dt;
        enforce_max_principle(st);
        last_stats_ = st;
    }

    const StepStats& last_stats() const { return last_stats_; }
    const std::variant<SeparableFaces, DenseFaces>& faces() const { return faces_; }
    double face_u(int iface, int j) const {
        return std::visit([&](const auto& t) { return t.ux(iface, j); }, faces_);
    }
    double face_v(int i, int jface) const {
        return std::visit([&](const auto& t) { return t.vy(i, jface); }, faces_);
    }

  private:
    void enforce_max_principle(const StepStats& st) {
        if (!(st.raw_min >= -kMaxPrincipleTol && st.raw_max <= 1.0 + kMaxPrincipleTol) ||
            !std::isfinite(st.raw_min) || !std::isfinite(st.raw_max)) {
            throw std::runtime_error(
                "step: discrete maximum principle violated (min=" +
                std::to_string(st.raw_min) + ", max=" + std::to_string(st.raw_max) +
                "); check the CFL constraint");
        }
    }

    SolverConfig config_;
    Grid grid_;
    double offset_ = 0.0;
    std::variant<SeparableFaces, DenseFaces> faces_;
    std::vector<double> scratch_;
    StepStats last_stats_;
};

/** Single Strang step of size dt (must satisfy stable_dt). */
inline void step(TemperatureField& f, const SolverConfig& c, double dt) {
    double cap = stable_dt(c, f.grid);
    if (dt > cap * (1.0 + 1e-9))
        throw std::invalid_argument("step: dt exceeds stable_dt");
    Stepper s(c, f.grid, f.window_offset);
    s.advance(f, dt);
}

/** Pointwise residual of kappa*Lap(T0) - u.grad(T0) + (v0^2/kappa) f(T0) with
 *  the scheme's own discrete operators. A nonnegative minimum certifies
 *  monotone evolution (T_t >= 0) for the discrete scheme. x_margin_cells
 *  excludes columns next to the closures (whose ghosts pin 1 and 0). */
inline double check_subsolution(const TemperatureField& f, const SolverConfig& c,
                                int x_margin_cells = 0) {
    const Grid& g = f.grid;
    Stepper s(c, g, f.window_offset);
    const double R0 = c.reaction_rate();
    const int ny = g.ny, P = ny + 2;
    std::vector<double> cm(P), cc(P), cp(P);
    kernel::gather_column(f, -1, cm.data());
    kernel::gather_column(f, 0, cc.data());
    double worst = std::numeric_limits<double>::infinity();
    for (int ix = 0; ix < g.nx; ++ix) {
        kernel::gather_column(f, ix + 1, cp.data());
        if (ix < x_margin_cells || ix >= g.nx - x_margin_cells) {
            std::swap(cm, cc);
            std::swap(cc, cp);
            continue;
        }
        for (int j = 0; j < ny; ++j) {
            double lap = (cm[j + 1] + cp[j + 1] - 2.0 * cc[j + 1]) / (g.dx * g.dx) +
                         (cc[j] + cc[j + 2] - 2.0 * cc[j + 1]) / (g.dy * g.dy);
            double uw = s.face_u(ix, j), ue = s.face_u(ix + 1, j);
            double vs = s.face_v(ix, j), vn = s.face_v(ix, j + 1);
            double fw = std::max(uw, 0.0) * cm[j + 1] + std::min(uw, 0.0) * cc[j + 1];
            double fe = std::max(ue, 0.0) * cc[j + 1] + std::min(ue, 0.0) * cp[j + 1];
            double fs = std::max(vs, 0.0) * cc[j] + std::min(vs, 0.0) * cc[j + 1];
            double fn = std::max(vn, 0.0) * cc[j + 1] + std::min(vn, 0.0) * cc[j + 2];
            double adv = (fe - fw) / g.dx + (fn - fs) / g.dy;
            double res = c.kappa * lap - adv + R0 * c.reaction.evaluate(cc[j + 1]);
            worst = std::min(worst, res);
        }
        std::swap(cm, cc);
        std::swap(cc, cp);
    }
    return worst;
}

}  // namespace frontlab

#endif
