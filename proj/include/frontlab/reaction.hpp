#ifndef FRONTLAB_REACTION_HPP
#define FRONTLAB_REACTION_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace frontlab {

enum class ReactionKind { KppLogistic, Ignition, Arrhenius };

/** Constants of the reaction that enter every lower bound:
 *  f(theta) >= f0 > 0 on [theta1 - zeta, theta4 + zeta]. */
struct ReactionConstants {
    double theta1 = 0.0;
    double theta4 = 0.0;
    double f0 = 0.0;
    double zeta = 0.0;
};

/** A nonlinearity f on [0,1] with f(0)=f(1)=0, f >= 0.
 *
 * evaluate() clamps to zero outside [0,1] so that solver overshoot at the
 * 1e-10 level never produces spurious reaction. Lf is max |f'| on [0,1],
 * estimated by dense sampling; it feeds the reaction CFL limit.
 */
struct ReactionSpec {
    ReactionKind kind = ReactionKind::KppLogistic;
    std::function<double(double)> f;
    double Lf = 1.0;
    ReactionConstants constants;
    // family parameters, kept for config echo
    double theta0 = 0.0;     // ignition cutoff
    double epsilon = 0.0;    // ignition ramp width
    double arrhenius_A = 0.0;
    double prefactor = 0.0;

    double evaluate(double T) const {
        if (T <= 0.0 || T >= 1.0) return 0.0;
        return f(T);
    }
};

namespace detail {

inline constexpr int kReactionSamples = 10000;

inline double sampled_min(const std::function<double(double)>& f, double a,
                          double b) {
    double m = f(a);
    for (int i = 1; i <= kReactionSamples; ++i) {
        double t = a + (b - a) * i / kReactionSamples;
        m = std::min(m, f(t));
    }
    return m;
}

inline double sampled_lipschitz(const std::function<double(double)>& f) {
    const int n = kReactionSamples;
    double L = 0.0, prev = f(0.0);
    for (int i = 1; i <= n; ++i) {
        double cur = f(static_cast<double>(i) / n);
        L = std::max(L, std::abs(cur - prev) * n);
        prev = cur;
    }
    return L;
}

inline void validate_nonlinearity(const std::function<double(double)>& f) {
    if (std::abs(f(0.0)) > 1e-14 || std::abs(f(1.0)) > 1e-14)
        throw std::invalid_argument("reaction: f(0) and f(1) must vanish");
    for (int i = 0; i <= kReactionSamples; ++i) {
        double t = static_cast<double>(i) / kReactionSamples;
        double v = f(t);
        if (!std::isfinite(v) || v < -1e-14)
            throw std::invalid_argument("reaction: f must be finite and >= 0 on [0,1]");
    }
}

}  // namespace detail

/** zeta by dyadic search (largest margin keeping min f > 0, capped), f0 as
 *  0.99 * sampled min of f over [theta1 - zeta, theta4 + zeta]. */
inline ReactionConstants extract_constants(
    const std::function<double(double)>& f, double theta1, double theta4,
    std::optional<double> forced_zeta = std::nullopt) {
    if (!(0.0 < theta1 && theta1 < theta4 && theta4 < 1.0))
        throw std::invalid_argument("extract_constants: need 0 < theta1 < theta4 < 1");
    if (detail::sampled_min(f, theta1, theta4) <= 0.0)
        throw std::invalid_argument("extract_constants: f vanishes inside [theta1, theta4]");

    const double zeta_cap = std::min(0.5, 0.5 * std::min(theta1, 1.0 - theta4));
    double zeta;
    if (forced_zeta) {
        zeta = *forced_zeta;
        if (!(zeta > 0.0 && zeta <= zeta_cap))
            throw std::invalid_argument("extract_constants: forced zeta out of range");
    } else {
        double lo = 0.0, hi = zeta_cap;
        for (int it = 0; it < 40; ++it) {
            double mid = 0.5 * (lo + hi);
            if (detail::sampled_min(f, theta1 - mid, theta4 + mid) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        zeta = lo;
    }
    ReactionConstants c;
    c.theta1 = theta1;
    c.theta4 = theta4;
    c.zeta = zeta;
    c.f0 = 0.99 * detail::sampled_min(f, theta1 - zeta, theta4 + zeta);
    if (!(c.f0 > 0.0))
        throw std::invalid_argument("extract_constants: empty reaction margin (f0 <= 0)");
    return c;
}

inline ReactionSpec make_kpp_logistic() {
    ReactionSpec r;
    r.kind = ReactionKind::KppLogistic;
    r.f = [](double T) { return T * (1.0 - T); };
    r.Lf = 1.0;
    r.constants = extract_constants(r.f, 0.25, 0.75);
    return r;
}

/** Ignition nonlinearity: zero on [0, theta0], C1 smoothstep ramp of width
 *  epsilon above the cutoff, then (1 - T). */
inline ReactionSpec make_ignition(double theta0, double epsilon) {
    if (!(theta0 > 0.0 && theta0 < 1.0))
        throw std::invalid_argument("make_ignition: theta0 must be in (0,1)");
    if (!(epsilon > 0.0 && epsilon < 0.25 * (1.0 - theta0)))
        throw std::invalid_argument("make_ignition: epsilon must be in (0, (1-theta0)/4)");
    ReactionSpec r;
    r.kind = ReactionKind::Ignition;
    r.theta0 = theta0;
    r.epsilon = epsilon;
    r.f = [theta0, epsilon](double T) {
        if (T <= theta0) return 0.0;
        double s = std::min(1.0, (T - theta0) / epsilon);
        return (1.0 - T) * s * s * (3.0 - 2.0 * s);
    };
    detail::validate_nonlinearity(r.f);
    r.Lf = detail::sampled_lipschitz(r.f);
    double theta1 = theta0 + 0.25 * (1.0 - theta0);
    double theta4 = 1.0 - 0.25 * (1.0 - theta0);
    r.constants = extract_constants(r.f, theta1, theta4);
    return r;
}

inline ReactionSpec make_arrhenius(double A, double prefactor) {
    if (!(A > 0.0)) throw std::invalid_argument("make_arrhenius: A must be > 0");
    if (prefactor < 0.0)
        throw std::invalid_argument("make_arrhenius: prefactor must be >= 0");
    ReactionSpec r;
    r.kind = ReactionKind::Arrhenius;
    r.arrhenius_A = A;
    r.prefactor = prefactor;
    r.f = [A, prefactor](double T) {
        if (T <= 0.0) return 0.0;  // essential zero by continuous extension
        return prefactor * (1.0 - T) * std::exp(-A / T);
    };
    detail::validate_nonlinearity(r.f);
    r.Lf = std::max(detail::sampled_lipschitz(r.f), 1e-300);
    if (prefactor > 0.0) r.constants = extract_constants(r.f, 0.25, 0.75);
    return r;
}

}  // namespace frontlab

#endif
