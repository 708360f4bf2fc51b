#ifndef FRONTLAB_CELL_GEOMETRY_HPP
#define FRONTLAB_CELL_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace frontlab {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

/** Curvilinear chart of one cell of the cellular flow.
 *
 * Cell-local coordinates run over [0, pi*H]^2 with the center at
 * (pi*H/2, pi*H/2). rho = H sin(x/H) sin(y/H) is constant on streamlines and
 * spans (0, H]; xi runs along the flow, zero on the negative-x ray from the
 * center, L on the positive-x ray. The chart (and every bound the paper
 * proves) is restricted to 0 < rho <= H/2; diagnostics stop at rho_min to
 * stay clear of the separatrix corners.
 */
struct CellChart {
    double H = 1.0;           // cell scale (strip height / pi)
    double x0 = 0.0, y0 = 0.0;  // lower-left cell corner, absolute coords
    int rho_sign = +1;        // neighbor-cell orientation bookkeeping
    double rho_min_frac = 1e-3;
    double ode_tol = 1e-8;

    double cx() const { return x0 + 0.5 * M_PI * H; }
    double cy() const { return y0 + 0.5 * M_PI * H; }
    double rho_min() const { return rho_min_frac * H; }
};

inline double rho(double x, double y, const CellChart& c) {
    return c.rho_sign * c.H * std::sin((x - c.x0) / c.H) * std::sin((y - c.y0) / c.H);
}

inline Vec2 grad_rho(double x, double y, const CellChart& c) {
    double xs = (x - c.x0) / c.H, ys = (y - c.y0) / c.H;
    return {c.rho_sign * std::cos(xs) * std::sin(ys),
            c.rho_sign * std::sin(xs) * std::cos(ys)};
}

// Laplacian of the stated rho by analytic differentiation: -2 rho / H^2.
inline double laplacian_rho(double x, double y, const CellChart& c) {
    return -2.0 * rho(x, y, c) / (c.H * c.H);
}

inline double grad_rho_sq(double x, double y, const CellChart& c) {
    Vec2 g = grad_rho(x, y, c);
    return g.x * g.x + g.y * g.y;
}

namespace detail {

// Halton low-discrepancy sequence, deterministic sampling
inline double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

// One RK4 step for dy/ds = rhs(y), y in R^n
template <int N>
std::array<double, N> rk4_step(const std::array<double, N>& y, double h,
                               const std::function<std::array<double, N>(
                                   const std::array<double, N>&)>& rhs) {
    auto k1 = rhs(y);
    std::array<double, N> t;
    for (int i = 0; i < N; ++i) t[i] = y[i] + 0.5 * h * k1[i];
    auto k2 = rhs(t);
    for (int i = 0; i < N; ++i) t[i] = y[i] + 0.5 * h * k2[i];
    auto k3 = rhs(t);
    for (int i = 0; i < N; ++i) t[i] = y[i] + h * k3[i];
    auto k4 = rhs(t);
    std::array<double, N> out;
    for (int i = 0; i < N; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

}  // namespace detail

/** Q at a point with 0 < rho <= H/2, by integrating
 *  d(log Q)/d rho = -Lap(rho)/|grad rho|^2 along the gradient flow line from
 *  the anchor level rho = H/2 (where Q = 1) down to the point. */
inline double conformal_Q(const CellChart& c, double x, double y) {
    double rp = rho(x, y, c);
    if (!(rp > 0.0 && rp <= 0.5 * c.H + 1e-12 * c.H))
        throw std::invalid_argument("conformal_Q: point outside 0 < rho <= H/2");
    if (grad_rho_sq(x, y, c) < 1e-24)
        throw std::invalid_argument("conformal_Q: critical point");
    // integrate from the point up to H/2; logQ = int_{rho}^{H/2} Lap/|grad|^2
    std::function<std::array<double, 3>(const std::array<double, 3>&)> rhs =
        [&c](const std::array<double, 3>& s) -> std::array<double, 3> {
        Vec2 g = grad_rho(s[0], s[1], c);
        double g2 = g.x * g.x + g.y * g.y;
        double lap = laplacian_rho(s[0], s[1], c);
        return {g.x / g2, g.y / g2, lap / g2};
    };
    std::array<double, 3> s = {x, y, 0.0};
    double target = 0.5 * c.H;
    double span = target - rp;
    if (std::abs(span) < 1e-15 * c.H) return 1.0;
    // step-doubling adaptive RK4 in the rho parameter
    double h = span / 16.0;
    double cur = rp;
    while (std::abs(target - cur) > 1e-14 * c.H) {
        if (std::abs(h) > std::abs(target - cur)) h = target - cur;
        auto full = detail::rk4_step<3>(s, h, rhs);
        auto half = detail::rk4_step<3>(detail::rk4_step<3>(s, 0.5 * h, rhs), 0.5 * h, rhs);
        double err = std::max({std::abs(full[0] - half[0]), std::abs(full[1] - half[1]),
                               std::abs(full[2] - half[2])});
        double tol = c.ode_tol * (1.0 + std::abs(half[2]));
        if (err > tol && std::abs(h) > 1e-12 * c.H) {
            h *= 0.5;
            continue;
        }
        s = half;
        cur += h;
        if (err < 0.03 * tol) h *= 2.0;
    }
    return std::exp(s[2]);
}

/** Min over quasi-random samples of |grad rho|^2 - rho/H on 0 < rho <= H/2. */
inline double gradest_check(const CellChart& c, int n_samples) {
    double worst = std::numeric_limits<double>::infinity();
    int accepted = 0, idx = 1;
    while (accepted < n_samples) {
        double x = c.x0 + M_PI * c.H * detail::halton(idx, 2);
        double y = c.y0 + M_PI * c.H * detail::halton(idx, 3);
        ++idx;
        double r = rho(x, y, c);
        if (r < c.rho_min() || r > 0.5 * c.H) continue;
        ++accepted;
        worst = std::min(worst, grad_rho_sq(x, y, c) - r / c.H);
    }
    return worst;
}

struct Streamline {
    std::vector<Vec2> points;     // closed polyline, starts on the negative-x ray
    std::vector<double> arclen;   // cumulative arc length per point
    std::vector<double> xi;       // cumulative xi measure (Q |grad rho| ds)
    double perimeter = 0.0;       // total arc length (2 L_total)
    double L_arc = 0.0;           // half-perimeter between the two axis rays
    double L_xi = 0.0;            // xi value on the positive-x ray
    double xi_total = 0.0;        // xi measure of the full loop
};

/** March once around the level curve rho = level, recording arc length and
 *  the xi measure. The trace starts at the negative-x ray and follows the
 *  flow (u . grad xi > 0); star-shapedness about the cell center makes the
 *  polar angle a monotone loop parameter. */
inline Streamline trace_streamline(const CellChart& c, double level, int n_points,
                                   bool with_xi = true) {
    if (!(level > 0.0 && level < c.H))
        throw std::invalid_argument("trace_streamline: level outside (0,H)");
    Streamline out;
    const double cx = c.cx(), cy = c.cy();
    // start on the negative-x ray: rho(cx - s, cy) = H cos(s/H)
    double s0 = c.H * std::acos(std::min(1.0, level / c.H));
    Vec2 p = {cx - s0, cy};
    const double ds = M_PI * c.H / 4096.0;
    auto tangent = [&](const Vec2& q) -> Vec2 {
        Vec2 g = grad_rho(q.x, q.y, c);
        double n = std::hypot(g.x, g.y);
        return {g.y / n, -g.x / n};  // along u = U grad^perp rho
    };
    auto project = [&](Vec2 q) -> Vec2 {
        for (int it = 0; it < 2; ++it) {
            Vec2 g = grad_rho(q.x, q.y, c);
            double g2 = g.x * g.x + g.y * g.y;
            double d = level - rho(q.x, q.y, c);
            q.x += g.x * d / g2;
            q.y += g.y * d / g2;
        }
        return q;
    };
    auto qval = [&](const Vec2& q) {
        return (level <= 0.5 * c.H) ? conformal_Q(c, q.x, q.y) : 1.0;
    };

    double theta = M_PI, arc = 0.0, xim = 0.0;
    double q_here = with_xi ? qval(p) : 0.0;
    out.points.push_back(p);
    out.arclen.push_back(0.0);
    out.xi.push_back(0.0);
    bool have_L = false;
    while (theta < 3.0 * M_PI - 1e-12) {
        // RK4 arc step with projection back onto the level set
        std::function<std::array<double, 2>(const std::array<double, 2>&)> rhs =
            [&](const std::array<double, 2>& q) -> std::array<double, 2> {
            Vec2 t = tangent({q[0], q[1]});
            return {t.x, t.y};
        };
        auto nxt = detail::rk4_step<2>({p.x, p.y}, ds, rhs);
        Vec2 pn = project({nxt[0], nxt[1]});
        double seg = std::hypot(pn.x - p.x, pn.y - p.y);
        double th_new = std::atan2(pn.y - cy, pn.x - cx);
        // unwrap against the running angle
        double base = std::fmod(theta, 2.0 * M_PI);
        double d = th_new - base;
        while (d > M_PI) d -= 2.0 * M_PI;
        while (d < -M_PI) d += 2.0 * M_PI;
        double theta_new = theta + d;
        double q_next = with_xi ? qval(pn) : 0.0;
        double gmid2 = std::hypot(grad_rho(0.5 * (p.x + pn.x), 0.5 * (p.y + pn.y), c).x,
                                  grad_rho(0.5 * (p.x + pn.x), 0.5 * (p.y + pn.y), c).y);
        double dxi = with_xi ? 0.5 * (q_here + q_next) * gmid2 * seg : 0.0;

        if (!have_L && theta_new >= 2.0 * M_PI) {  // positive-x ray crossing
            double f = (2.0 * M_PI - theta) / (theta_new - theta);
            out.L_arc = arc + f * seg;
            out.L_xi = xim + f * dxi;
            have_L = true;
        }
        if (theta_new >= 3.0 * M_PI) {  // back to the start ray: close the loop
            double f = (3.0 * M_PI - theta) / (theta_new - theta);
            arc += f * seg;
            xim += f * dxi;
            out.points.push_back(out.points.front());
            out.arclen.push_back(arc);
            out.xi.push_back(xim);
            theta = 3.0 * M_PI;
            break;
        }
        p = pn;
        q_here = q_next;
        theta = theta_new;
        arc += seg;
        xim += dxi;
        out.points.push_back(p);
        out.arclen.push_back(arc);
        out.xi.push_back(xim);
    }
    out.perimeter = arc;
    out.xi_total = xim;
    if (!have_L) throw std::runtime_error("trace_streamline: failed to cross axis ray");
    // resample to the requested polyline resolution
    if (n_points > 2 && static_cast<int>(out.points.size()) > n_points) {
        Streamline rs;
        rs.perimeter = out.perimeter;
        rs.L_arc = out.L_arc;
        rs.L_xi = out.L_xi;
        rs.xi_total = out.xi_total;
        for (int k = 0; k <= n_points; ++k) {
            double target = out.perimeter * k / n_points;
            auto it = std::lower_bound(out.arclen.begin(), out.arclen.end(), target);
            std::size_t i = std::min<std::size_t>(it - out.arclen.begin(),
                                                  out.points.size() - 1);
            if (i == 0) i = 1;
            double a0 = out.arclen[i - 1], a1 = out.arclen[i];
            double f = (a1 > a0) ? (target - a0) / (a1 - a0) : 0.0;
            rs.points.push_back({out.points[i - 1].x + f * (out.points[i].x - out.points[i - 1].x),
                                 out.points[i - 1].y + f * (out.points[i].y - out.points[i - 1].y)});
            rs.arclen.push_back(target);
            rs.xi.push_back(out.xi[i - 1] + f * (out.xi[i] - out.xi[i - 1]));
        }
        return rs;
    }
    return out;
}

/** xi of a point (0 < rho <= H/2): xi measure accumulated along the level
 *  curve from the negative-x ray to the point's polar angle. */
inline double xi_coordinate(const CellChart& c, double x, double y) {
    double level = rho(x, y, c);
    if (!(level > 0.0 && level <= 0.5 * c.H))
        throw std::invalid_argument("xi_coordinate: point outside 0 < rho <= H/2");
    Streamline s = trace_streamline(c, level, 0, true);
    double th = std::atan2(y - c.cy(), x - c.cx());
    double thu = th;  // unwrap into [pi, 3 pi)
    while (thu < M_PI) thu += 2.0 * M_PI;
    double frac = (thu - M_PI) / (2.0 * M_PI);
    // locate the angular bracket along the stored polyline
    double prev_theta = M_PI;
    for (std::size_t i = 1; i < s.points.size(); ++i) {
        double t2 = std::atan2(s.points[i].y - c.cy(), s.points[i].x - c.cx());
        double base = std::fmod(prev_theta, 2.0 * M_PI);
        double d = t2 - base;
        while (d > M_PI) d -= 2.0 * M_PI;
        while (d < -M_PI) d += 2.0 * M_PI;
        double cur_theta = prev_theta + d;
        if (cur_theta >= thu && prev_theta <= thu) {
            double f = (cur_theta > prev_theta) ? (thu - prev_theta) / (cur_theta - prev_theta) : 0.0;
            return s.xi[i - 1] + f * (s.xi[i] - s.xi[i - 1]);
        }
        prev_theta = cur_theta;
    }
    return frac * s.xi_total;
}

/** Inverse chart: the point at (rho, xi), by marching the level curve. */
inline Vec2 chart_point(const CellChart& c, double level, double xi_target) {
    Streamline s = trace_streamline(c, level, 0, true);
    double x = std::fmod(xi_target, s.xi_total);
    if (x < 0) x += s.xi_total;
    auto it = std::lower_bound(s.xi.begin(), s.xi.end(), x);
    std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(1, it - s.xi.begin()),
                                          s.points.size() - 1);
    double a0 = s.xi[i - 1], a1 = s.xi[i];
    double f = (a1 > a0) ? (x - a0) / (a1 - a0) : 0.0;
    return {s.points[i - 1].x + f * (s.points[i].x - s.points[i - 1].x),
            s.points[i - 1].y + f * (s.points[i].y - s.points[i - 1].y)};
}

struct MetricSample {
    double rho = 0.0, xi = 0.0;
    double E1 = 0.0, E2 = 0.0;
    double omega = 0.0;  // E2/E1 = 1/Q
    double Q = 0.0;
};

inline MetricSample metric_coeffs(const CellChart& c, double x, double y,
                                  bool with_xi = false) {
    double r = rho(x, y, c);
    if (!(r > 0.0 && r <= 0.5 * c.H))
        throw std::invalid_argument("metric_coeffs: point outside 0 < rho <= H/2");
    double gn = std::sqrt(grad_rho_sq(x, y, c));
    if (gn < 1e-12)
        throw std::invalid_argument("metric_coeffs: critical point");
    MetricSample m;
    m.rho = r;
    m.Q = conformal_Q(c, x, y);
    m.E1 = 1.0 / gn;
    m.E2 = 1.0 / (m.Q * gn);
    m.omega = 1.0 / m.Q;
    if (with_xi) m.xi = xi_coordinate(c, x, y);
    return m;
}

struct ProcoordReport {
    int n_samples = 0;
    double min_E1 = 0.0, min_E2 = 0.0;
    double min_omega = 0.0, max_omega = 0.0;
    double max_H_domega_drho = 0.0;
    double max_H_domega_dxi_over_log = 0.0;
    double rho_min = 0.0;
};

/** Empirical constants of the coordinate bounds over 0 < rho <= H/2.
 *  Derivatives are taken by symmetric differences through the chart maps:
 *  d/drho along the gradient flow line (xi is constant there), d/dxi along
 *  the streamline. */
inline ProcoordReport verify_procoord(const CellChart& c, int n_samples) {
    ProcoordReport rep;
    rep.rho_min = c.rho_min();
    rep.min_E1 = rep.min_E2 = rep.min_omega = std::numeric_limits<double>::infinity();
    rep.max_omega = 0.0;
    int idx = 1;
    const double side = M_PI * c.H;
    while (rep.n_samples < n_samples) {
        double x = c.x0 + side * detail::halton(idx, 2);
        double y = c.y0 + side * detail::halton(idx, 3);
        ++idx;
        double r = rho(x, y, c);
        if (r < rep.rho_min || r > 0.5 * c.H) continue;
        ++rep.n_samples;
        MetricSample m = metric_coeffs(c, x, y);
        rep.min_E1 = std::min(rep.min_E1, m.E1);
        rep.min_E2 = std::min(rep.min_E2, m.E2);
        rep.min_omega = std::min(rep.min_omega, m.omega);
        rep.max_omega = std::max(rep.max_omega, m.omega);

        // d omega / d rho: nudge along the gradient line
        double dr = std::min({1e-3 * c.H, 0.25 * (0.5 * c.H - r), 0.25 * (r - 0.5 * rep.rho_min)});
        if (dr > 1e-7 * c.H) {
            Vec2 g = grad_rho(x, y, c);
            double g2 = g.x * g.x + g.y * g.y;
            Vec2 pp = {x + g.x * dr / g2, y + g.y * dr / g2};
            Vec2 pm = {x - g.x * dr / g2, y - g.y * dr / g2};
            auto refine = [&](Vec2 q, double target) {
                for (int it = 0; it < 3; ++it) {
                    Vec2 gg = grad_rho(q.x, q.y, c);
                    double gg2 = gg.x * gg.x + gg.y * gg.y;
                    double d = target - rho(q.x, q.y, c);
                    q.x += gg.x * d / gg2;
                    q.y += gg.y * d / gg2;
                }
                return q;
            };
            pp = refine(pp, r + dr);
            pm = refine(pm, r - dr);
            double wp = 1.0 / conformal_Q(c, pp.x, pp.y);
            double wm = 1.0 / conformal_Q(c, pm.x, pm.y);
            rep.max_H_domega_drho =
                std::max(rep.max_H_domega_drho, c.H * std::abs(wp - wm) / (2.0 * dr));
        }

        // d omega / d xi: nudge along the streamline
        double gn = std::sqrt(grad_rho_sq(x, y, c));
        double dxi = 1e-3 * c.H;
        double dsarc = dxi / (m.Q * gn);
        Vec2 t = {grad_rho(x, y, c).y / gn, -grad_rho(x, y, c).x / gn};
        auto project = [&](Vec2 q) {
            for (int it = 0; it < 3; ++it) {
                Vec2 gg = grad_rho(q.x, q.y, c);
                double gg2 = gg.x * gg.x + gg.y * gg.y;
                double d = r - rho(q.x, q.y, c);
                q.x += gg.x * d / gg2;
                q.y += gg.y * d / gg2;
            }
            return q;
        };
        Vec2 sp = project({x + t.x * dsarc, y + t.y * dsarc});
        Vec2 sm = project({x - t.x * dsarc, y - t.y * dsarc});
        double wp = 1.0 / conformal_Q(c, sp.x, sp.y);
        double wm = 1.0 / conformal_Q(c, sm.x, sm.y);
        double dwdxi = std::abs(wp - wm) / (2.0 * dxi);
        double denom = std::abs(std::log(r / c.H));
        if (denom > 1e-12)
            rep.max_H_domega_dxi_over_log =
                std::max(rep.max_H_domega_dxi_over_log, c.H * dwdxi / denom);
    }
    return rep;
}

}  // namespace frontlab

#endif
