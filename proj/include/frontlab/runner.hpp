#ifndef FRONTLAB_RUNNER_HPP
#define FRONTLAB_RUNNER_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "frontlab/diagnostics.hpp"
#include "frontlab/solver.hpp"

namespace frontlab {

struct RunOptions {
    double shift_threshold = 1e-6;  // right-tail trigger for window shifts
    int shift_check_stride = 16;    // steps between trigger checks
    bool track_monotone = false;    // record min inter-sample growth
};

struct RunResult {
    std::vector<DiagnosticsRecord> records;
    TemperatureField field;
    double dt = 0.0;
    long total_steps = 0;
    int total_shift_cells = 0;
    double min_T_ever = 1.0, max_T_ever = 0.0;  // raw pre-clamp extremes
    double min_intersample_growth = 0.0;        // only when track_monotone
    double numerical_diffusion = 0.0;           // u_max * dx / 2
};

namespace detail {

inline DiagnosticsRecord sample_record(const TemperatureField& f,
                                       const TemperatureField* prev_dt,
                                       double dt, const SolverConfig& c) {
    DiagnosticsRecord r;
    r.t = f.t;
    r.V_reaction = burning_rate_reaction(f, c.kappa, c.v0, c.reaction);
    r.grad_energy = gradient_energy(f, c.kappa);
    r.V_mass = prev_dt ? burning_rate_mass(*prev_dt, f, dt, c.kappa, c.flow)
                       : std::numeric_limits<double>::quiet_NaN();
    double mn = 1.0, mx = 0.0;
    for (double v : f.values) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    r.min_T = mn;
    r.max_T = mx;
    try {
        r.front_x = front_position(f, 0.5);
    } catch (const std::runtime_error&) {
        r.front_x = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

// min of (next - prev) over the window overlap, aligned by absolute x
inline double min_growth(const TemperatureField& prev, const TemperatureField& next) {
    const Grid& g = prev.grid;
    int shift = static_cast<int>(std::llround(
        (next.window_offset - prev.window_offset) / g.dx));
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.nx; ++i) {
        int ip = i + shift;  // column of prev aligned with column i of next
        if (ip < 0 || ip >= g.nx) continue;
        const double* a = prev.column(ip);
        const double* b = next.column(i);
        for (int j = 0; j < g.ny; ++j) worst = std::min(worst, b[j] - a[j]);
    }
    return worst;
}

}  // namespace detail

/** Integrate to t_end, sampling diagnostics every sample_every time units.
 *  V_mass at a sample is the corrected one-step mass rate ending there. */
inline RunResult run(const SolverConfig& c, const Grid& g, TemperatureField T0,
                     double t_end, double sample_every, RunOptions opts = {}) {
    if (t_end < 0.0) throw std::invalid_argument("run: t_end must be >= 0");
    RunResult out;
    out.field = std::move(T0);
    out.dt = stable_dt(c, g);
    out.numerical_diffusion = c.flow.max_speed * g.dx / 2.0;
    out.min_intersample_growth = std::numeric_limits<double>::infinity();

    Stepper stepper(c, g, out.field.window_offset);
    out.records.push_back(detail::sample_record(out.field, nullptr, out.dt, c));
    out.records.back().avg_V = out.records.back().V_reaction;

    if (t_end == 0.0) {
        out.min_intersample_growth = 0.0;
        return out;
    }
    const long n_steps = static_cast<long>(std::ceil(t_end / out.dt - 1e-9));
    const long stride = std::max<long>(1, std::lround(sample_every / out.dt));

    TemperatureField prev_dt;        // state one step before a sample
    TemperatureField prev_sample;    // previous sampled state (monotone check)
    if (opts.track_monotone) prev_sample = out.field;

    for (long s = 1; s <= n_steps; ++s) {
        bool sampling = (s % stride == 0) || s == n_steps;
        if (sampling) prev_dt = out.field;
        stepper.advance(out.field, out.dt);
        out.min_T_ever = std::min(out.min_T_ever, stepper.last_stats().raw_min);
        out.max_T_ever = std::max(out.max_T_ever, stepper.last_stats().raw_max);
        ++out.total_steps;
        if (sampling) {
            out.records.push_back(detail::sample_record(out.field, &prev_dt, out.dt, c));
            out.records.back().avg_V = time_average_V(out.records);
            if (opts.track_monotone) {
                out.min_intersample_growth = std::min(
                    out.min_intersample_growth,
                    detail::min_growth(prev_sample, out.field));
                prev_sample = out.field;
            }
        }
        if (s % opts.shift_check_stride == 0 && s != n_steps) {
            int moved = shift_window(out.field, opts.shift_threshold);
            if (moved > 0) {
                out.total_shift_cells += moved;
                stepper.rebuild(out.field.window_offset);
            }
        }
    }
    if (!opts.track_monotone) out.min_intersample_growth = 0.0;
    return out;
}

}  // namespace frontlab

#endif
