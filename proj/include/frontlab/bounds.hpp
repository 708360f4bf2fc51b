#ifndef FRONTLAB_BOUNDS_HPP
#define FRONTLAB_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "frontlab/tubes.hpp"

namespace frontlab {

/** The four scales governing the bounds. */
struct Scales {
    double l = 0.0;    // laminar front width kappa/v0
    double Pe = 0.0;   // UH/kappa
    double tau_c = 0.0;  // chemical time kappa/v0^2
    double tau_u = 0.0;  // turnover time H/U (infinite when U = 0)
    bool u_zero = false;
};

inline Scales laminar_scales(double kappa, double v0, double U, double H) {
    if (!(kappa > 0.0 && v0 > 0.0 && H > 0.0) || U < 0.0)
        throw std::invalid_argument("laminar_scales: need kappa, v0, H > 0 and U >= 0");
    Scales s;
    s.l = kappa / v0;
    s.tau_c = kappa / (v0 * v0);
    if (U > 0.0) {
        s.Pe = U * H / kappa;
        s.tau_u = H / U;
    } else {
        s.Pe = 0.0;
        s.tau_u = std::numeric_limits<double>::infinity();
        s.u_zero = true;
    }
    return s;
}

/** An interval [lo, hi] on which |u| stays within a factor 2 of its sup,
 *  weighted by (1 + l/h)^{-1} * int |u| dy / H. */
struct WeightedInterval {
    double lo = 0.0, hi = 0.0;
    double h = 0.0;            // half-width
    double flux_over_H = 0.0;  // int |u| dy / H
    double weight = 0.0;
};

struct IntervalFamily {
    std::vector<WeightedInterval> intervals;
    double total_weight = 0.0;
};

/** Disjoint family of factor-2 intervals maximizing the total weight, by
 *  weighted-interval scheduling over all O(n^2) grid-aligned candidates.
 *  Samples are cell values u_i on cells of width H/n. */
inline IntervalFamily select_intervals(const std::vector<double>& u, double H,
                                       double l) {
    const int n = static_cast<int>(u.size());
    if (n < 16) throw std::invalid_argument("select_intervals: need >= 16 samples");
    if (l < 0.0) throw std::invalid_argument("select_intervals: l must be >= 0");
    const double dy = H / n;

    // best[j] = max weight using cells [0, j); parent pointers for recovery
    std::vector<double> best(n + 1, 0.0);
    std::vector<int> take_from(n + 1, -1);  // start index of the interval ending at j
    for (int j = 1; j <= n; ++j) {
        best[j] = best[j - 1];
        take_from[j] = -1;
        // extend candidates [i, j) leftward from the endpoint
        double amin = std::numeric_limits<double>::infinity(), amax = 0.0;
        double sum = 0.0;
        int sign = 0;
        for (int i = j - 1; i >= 0; --i) {
            double v = u[i];
            int sg = (v > 0.0) - (v < 0.0);
            if (sg == 0) break;  // zero sample ends sign constancy
            if (sign == 0) sign = sg;
            if (sg != sign) break;
            double a = std::abs(v);
            amin = std::min(amin, a);
            amax = std::max(amax, a);
            sum += a * dy;
            if (2.0 * amin < amax) break;  // factor-2 can only degrade leftward
            double h = 0.5 * (j - i) * dy;
            double w = sum / ((1.0 + l / h) * H);
            if (best[i] + w > best[j]) {
                best[j] = best[i] + w;
                take_from[j] = i;
            }
        }
    }

    IntervalFamily fam;
    fam.total_weight = best[n];
    int j = n;
    while (j > 0) {
        if (take_from[j] < 0) {
            --j;
            continue;
        }
        int i = take_from[j];
        WeightedInterval w;
        w.lo = i * dy;
        w.hi = j * dy;
        w.h = 0.5 * (j - i) * dy;
        double s = 0.0;
        for (int k = i; k < j; ++k) s += std::abs(u[k]) * dy;
        w.flux_over_H = s / H;
        w.weight = w.flux_over_H / (1.0 + l / w.h);
        fam.intervals.push_back(w);
        j = i;
    }
    std::reverse(fam.intervals.begin(), fam.intervals.end());
    return fam;
}

enum class BoundRegime { Shear, Percolating, CellularSqrt, CellularFifth };

inline const char* regime_name(BoundRegime r) {
    switch (r) {
        case BoundRegime::Shear: return "shear";
        case BoundRegime::Percolating: return "percolating";
        case BoundRegime::CellularSqrt: return "cellular-sqrt";
        case BoundRegime::CellularFifth: return "cellular-fifth";
    }
    return "?";
}

/** A lower-bound functional evaluation, with the geometry that produced it
 *  and the calibration constants used (the paper's C, C1, C2 default to 1). */
struct BoundReport {
    double value = 0.0;
    BoundRegime regime = BoundRegime::Shear;
    Scales scales;
    double C = 1.0, C1 = 1.0, C2 = 1.0;
    IntervalFamily intervals;      // shear route
    TubeFamily tubes;              // percolating route
    double boundary_layer_h = 0.0; // cellular route
    std::vector<std::string> flags;
};

/** Theorem-0.1 functional: C (v0 + sum_j (1+l/h_j)^{-1} int_{I_j} |u| dy/H). */
inline BoundReport shear_bound_functional(const std::vector<double>& u_samples,
                                          double kappa, double v0, double H,
                                          double C = 1.0) {
    double l = kappa / v0;
    BoundReport r;
    r.regime = BoundRegime::Shear;
    r.C = C;
    double umax = 0.0;
    for (double v : u_samples) umax = std::max(umax, std::abs(v));
    r.scales = laminar_scales(kappa, v0, umax, H);
    r.intervals = select_intervals(u_samples, H, l);
    r.value = C * (v0 + r.intervals.total_weight);
    return r;
}

/** Theorem-2 functional: C (v0 + sum_j (1+l/h_j)^{-1} flux_j / H). */
inline BoundReport percolating_bound_functional(const TubeFamily& tubes,
                                                double kappa, double v0, double H,
                                                double C = 1.0) {
    double l = kappa / v0;
    BoundReport r;
    r.regime = BoundRegime::Percolating;
    r.C = C;
    r.tubes = tubes;
    double sum = 0.0;
    double umax = 0.0;
    for (const Tube& t : tubes.tubes) {
        sum += t.flux / ((1.0 + l / t.h) * H);
        umax = std::max(umax, t.flux / (2.0 * t.h));
        if (!t.geometry_verified) r.flags.push_back("geometry-unverified");
    }
    r.scales = laminar_scales(kappa, v0, umax, H);
    r.value = C * (v0 + sum);
    return r;
}

/** Theorem-0.2 bound: (C1 sqrt(tau_c/tau_u) + C2) v0 below the crossover,
 *  (C1 (tau_c/tau_u)^{1/5} + C2) v0 above it. H is the cell scale. */
inline BoundReport cellular_bound(double kappa, double v0, double U, double H,
                                  double C1 = 1.0, double C2 = 1.0) {
    BoundReport r;
    r.C1 = C1;
    r.C2 = C2;
    r.scales = laminar_scales(kappa, v0, U, H);
    if (r.scales.Pe < 1.0) r.flags.push_back("Pe<1");
    if (r.scales.l / H > 1.0) r.flags.push_back("l/H>1");
    if (r.scales.u_zero) {
        r.regime = BoundRegime::CellularSqrt;
        r.value = C2 * v0;  // ratio -> 0
        return r;
    }
    double ratio = r.scales.tau_c / r.scales.tau_u;
    if (ratio <= 1.0) {
        r.regime = BoundRegime::CellularSqrt;
        r.value = (C1 * std::sqrt(ratio) + C2) * v0;
    } else {
        r.regime = BoundRegime::CellularFifth;
        r.value = (C1 * std::pow(ratio, 0.2) + C2) * v0;
    }
    return r;
}

/** Optimal boundary-layer width: h = (1/6) sqrt(kappa H / U) when
 *  tau_c <= tau_u, h = (1/6) (kappa^3 H^2 / (U^2 v0))^{1/5} otherwise.
 *  Ties resolve to the tau_c >= tau_u formula. */
struct BoundaryLayer {
    double h = 0.0;
    bool sqrt_branch = false;
    bool valid = true;  // h <= H/6 under Pe >= 1 and l <= H
};

inline BoundaryLayer boundary_layer_width(double kappa, double v0, double U,
                                          double H) {
    if (!(kappa > 0.0 && v0 > 0.0 && U > 0.0 && H > 0.0))
        throw std::invalid_argument("boundary_layer_width: positive inputs required");
    Scales s = laminar_scales(kappa, v0, U, H);
    double ratio = s.tau_c / s.tau_u;
    BoundaryLayer b;
    if (ratio < 1.0) {
        b.sqrt_branch = true;
        b.h = std::sqrt(kappa * H / U) / 6.0;
    } else {
        b.sqrt_branch = false;
        b.h = std::pow(kappa * kappa * kappa * H * H / (U * U * v0), 0.2) / 6.0;
    }
    b.valid = (b.h <= H / 6.0 + 1e-12 * H) && s.Pe >= 1.0 && s.l <= H;
    return b;
}

/** Proposition "general" floor with its proof constant: C sqrt(f0) zeta v0. */
inline double floor_bound(double f0, double zeta, double v0, double C = 1.0) {
    if (!(f0 > 0.0 && zeta > 0.0))
        throw std::invalid_argument("floor_bound: f0 and zeta must be > 0");
    return C * std::sqrt(f0) * zeta * v0;
}

/** Implied constant C* = measured speed / functional evaluated at C = 1. */
struct Calibration {
    double c_star = 0.0;
    bool flagged = false;
};

inline Calibration compare_to_simulation(double measured_c, const BoundReport& r) {
    Calibration cal;
    double unit;  // the functional re-evaluated at unit constants
    if (r.regime == BoundRegime::CellularSqrt || r.regime == BoundRegime::CellularFifth) {
        double ratio = r.scales.u_zero ? 0.0 : r.scales.tau_c / r.scales.tau_u;
        double enh = (ratio <= 1.0) ? std::sqrt(ratio) : std::pow(ratio, 0.2);
        unit = (enh + 1.0) * (r.scales.l / r.scales.tau_c);  // l/tau_c = v0
    } else {
        unit = r.value / r.C;
    }
    cal.c_star = measured_c / unit;
    cal.flagged = !(measured_c > 0.0) || !r.flags.empty();
    return cal;
}

}  // namespace frontlab

#endif
