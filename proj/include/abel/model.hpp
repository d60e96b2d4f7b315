#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "abel/roots.hpp"
#include "abel/trig.hpp"

namespace abel {

/// Raw coefficients of dx/dt = (a0 + a1 sin t + a2 cos t) x^3
///                           + (b0 + b1 sin t + b2 cos t) x^2.
struct AbelParams {
    double a0 = 0, a1 = 0, a2 = 0;
    double b0 = 0, b1 = 0, b2 = 0;

    TrigPoly g() const { return TrigPoly::linear(a0, a1, a2); }
    TrigPoly f() const { return TrigPoly::linear(b0, b1, b2); }
};

/// Which of the two parameter symmetries were applied on top of the time
/// rotation.  s1: (t,p0,q0,q2) -> (-t,-p0,-q0,-q2).  s2: (x,t,p0,q1) ->
/// (-x,-t,-p0,-q1).  Applying both flips x and all three q's with no net
/// time reversal.
struct SignFlips {
    bool s1 = false;
    bool s2 = false;

    bool x_negated() const { return s2; }
    bool time_reversed() const { return s1 != s2; }
};

/// Rotated/reflected parameterization (p0 + p1 sin t) x^3
/// + (q0 + q1 sin t + q2 cos t) x^2 with p1 >= 0 and, when produced by
/// reduce_to_normal_form, p0 >= 0 and q0 >= 0.
struct NormalForm {
    double p0 = 0, p1 = 0, q0 = 0, q1 = 0, q2 = 0;
    double theta = 0;        // rotation t -> t - theta applied to the source
    SignFlips flips;
    bool degenerate = false; // p1 == 0: no rotation was available

    TrigPoly g() const { return TrigPoly::linear(p0, p1, 0.0); }
    TrigPoly f() const { return TrigPoly::linear(q0, q1, q2); }

    /// Dominance inequality (p0 q1 - p1 q0)^2 + p0^2 q2^2 < p1^2 q2^2 with
    /// p1 > 0 and q2 != 0: g'f - f'g then keeps the sign of q2, so the
    /// nullcline u = -f/g is strictly monotone wherever g != 0.
    bool nullcline_monotone() const {
        const double lhs = sq(p0 * q1 - p1 * q0) + sq(p0 * q2);
        return p1 > 0.0 && q2 != 0.0 && lhs < sq(p1 * q2);
    }

    /// Initial value (at t = 0) of the source-equation orbit corresponding
    /// to a normal-form orbit z, given a callable z(t) defined on one period.
    /// The source solution is x(t) = sigma * z(eps*(t + theta)).
    template <class Orbit>
    double map_initial_value_back(Orbit&& z) const {
        const double eps = flips.time_reversed() ? -1.0 : 1.0;
        const double sigma = flips.x_negated() ? -1.0 : 1.0;
        double tau = std::fmod(eps * theta, two_pi);
        if (tau < 0) tau += two_pi;
        return sigma * z(tau);
    }

    /// Multiplier of the corresponding source-equation cycle.  Time reversal
    /// inverts the multiplier; rotation and x-negation preserve it.
    double map_multiplier_back(double multiplier_nf) const {
        return flips.time_reversed() ? 1.0 / multiplier_nf : multiplier_nf;
    }

private:
    static double sq(double v) { return v * v; }
};

/// t -> t - theta with theta = atan2(a2, a1): the unique rotation making the
/// cubic coefficient p0 + p1 sin t with p1 = sqrt(a1^2 + a2^2) >= 0.  The two
/// sign symmetries are then applied so that p0 >= 0 and q0 >= 0.
inline NormalForm reduce_to_normal_form(const AbelParams& p) {
    NormalForm nf;
    const double p1 = std::hypot(p.a1, p.a2);
    nf.p0 = p.a0;
    nf.p1 = p1;
    nf.q0 = p.b0;
    if (p1 > 0.0) {
        nf.theta = std::atan2(p.a2, p.a1);
        nf.q1 = (p.a1 * p.b1 + p.a2 * p.b2) / p1;
        nf.q2 = (p.a1 * p.b2 - p.a2 * p.b1) / p1;
    } else {
        // g has no oscillatory part; leave f unrotated
        nf.theta = 0.0;
        nf.q1 = p.b1;
        nf.q2 = p.b2;
        nf.degenerate = true;
    }

    if (nf.p0 < 0.0 && nf.q0 < 0.0) {
        nf.flips.s1 = true;
        nf.p0 = -nf.p0;
        nf.q0 = -nf.q0;
        nf.q2 = -nf.q2;
    } else if (nf.p0 < 0.0) {
        nf.flips.s2 = true;
        nf.p0 = -nf.p0;
        nf.q1 = -nf.q1;
    } else if (nf.q0 < 0.0) {
        nf.flips.s1 = nf.flips.s2 = true;
        nf.q0 = -nf.q0;
        nf.q1 = -nf.q1;
        nf.q2 = -nf.q2;
    }
    return nf;
}

enum class Monotonicity { increasing, decreasing, indefinite };

inline const char* to_string(Monotonicity m) {
    switch (m) {
        case Monotonicity::increasing: return "increasing";
        case Monotonicity::decreasing: return "decreasing";
        default: return "indefinite";
    }
}

struct CoefficientConditionOptions {
    int samples = 4096;          // grid points per period
    double zero_xtol = 1e-12;    // bisection tolerance for zeros of g
    double common_zero_tol = 1e-9;  // |f| below this at a zero of g counts as common
    double monotone_floor = 1e-10;  // |g'f - f'g| below this is unresolvable
};

struct CoefficientConditions {
    bool c1 = false;
    Monotonicity c2 = Monotonicity::indefinite;
    bool resolution_warning = false;
    std::vector<double> g_zeros;  // zeros of g in [0, 2pi), refined
};

/// Zeros of a trig polynomial in [0, 2pi) by sign-change bracketing on a
/// dense grid plus bisection.  Tangential zeros are not detected.
inline std::vector<double> find_zeros(const TrigPoly& g, int samples = 4096,
                                      double xtol = 1e-12) {
    std::vector<double> zeros;
    const double h = two_pi / samples;
    double t0 = 0.0, g0 = g.eval(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double t1 = i * h;
        const double g1 = g.eval(t1);
        if (g0 == 0.0) zeros.push_back(t0);
        else if (g0 * g1 < 0.0) {
            auto r = bisect([&](double t) { return g.eval(t); }, t0, t1, g0, g1, xtol);
            zeros.push_back(r.x);
        }
        t0 = t1;
        g0 = g1;
    }
    return zeros;
}

/// c1: g has exactly two zeros per period and shares none with f.
/// c2: monotonicity class of u = -f/g from the sign of g'f - f'g.
inline CoefficientConditions check_coefficient_conditions(const TrigPoly& g, const TrigPoly& f,
                              const CoefficientConditionOptions& opt = {}) {
    CoefficientConditions res;
    res.g_zeros = find_zeros(g, opt.samples, opt.zero_xtol);

    bool common_zero = false;
    for (double z : res.g_zeros)
        if (std::fabs(f.eval(z)) < opt.common_zero_tol) common_zero = true;
    res.c1 = (res.g_zeros.size() == 2) && !common_zero;

    int pos = 0, neg = 0;
    for (int i = 0; i < opt.samples; ++i) {
        const double t = i * (two_pi / opt.samples);
        const double w = g.deriv(t) * f.eval(t) - f.deriv(t) * g.eval(t);
        if (std::fabs(w) < opt.monotone_floor) {
            res.resolution_warning = true;
            res.c2 = Monotonicity::indefinite;
            return res;
        }
        (w > 0.0 ? pos : neg)++;
    }
    if (pos == opt.samples) res.c2 = Monotonicity::increasing;
    else if (neg == opt.samples) res.c2 = Monotonicity::decreasing;
    else res.c2 = Monotonicity::indefinite;
    return res;
}

enum class Sign { negative = -1, zero = 0, positive = 1 };

inline Sign sign_of(double v) {
    if (v > 0.0) return Sign::positive;
    if (v < 0.0) return Sign::negative;
    return Sign::zero;
}

/// The three uniqueness inequalities on the raw parameters, the
/// nullcline-monotonicity inequality on the normal form, and the zero-count
/// and monotonicity classification of the reduced coefficients.
struct HypothesisReport {
    bool uniqueness_a = false;  // a0^2 >= a1^2 + a2^2
    bool uniqueness_b = false;  // b0^2 >= b1^2 + b2^2
    bool uniqueness_c = false;  // (a1 b0 - a0 b1)^2 + (a0 b2 - a2 b0)^2 >= (a1 b2 - a2 b1)^2
    bool nullcline_monotone = false;
    bool c1 = false;
    Monotonicity c2 = Monotonicity::indefinite;
    bool c2_resolution_warning = false;
    Sign q2_sign = Sign::zero;

    bool any_uniqueness() const { return uniqueness_a || uniqueness_b || uniqueness_c; }
};

inline HypothesisReport classify_hypotheses(const AbelParams& p) {
    HypothesisReport rep;
    rep.uniqueness_a = p.a0 * p.a0 >= p.a1 * p.a1 + p.a2 * p.a2;
    rep.uniqueness_b = p.b0 * p.b0 >= p.b1 * p.b1 + p.b2 * p.b2;
    const double m1 = p.a1 * p.b0 - p.a0 * p.b1;
    const double m2 = p.a0 * p.b2 - p.a2 * p.b0;
    const double m3 = p.a1 * p.b2 - p.a2 * p.b1;
    rep.uniqueness_c = m1 * m1 + m2 * m2 >= m3 * m3;

    const NormalForm nf = reduce_to_normal_form(p);
    rep.nullcline_monotone = nf.nullcline_monotone();
    rep.q2_sign = sign_of(nf.q2);
    if (!nf.g().is_zero()) {
        const CoefficientConditions c = check_coefficient_conditions(nf.g(), nf.f());
        rep.c1 = c.c1;
        rep.c2 = c.c2;
        rep.c2_resolution_warning = c.resolution_warning;
    }
    return rep;
}

inline HypothesisReport classify_hypotheses(const NormalForm& nf) {
    HypothesisReport rep;
    rep.uniqueness_a = nf.p0 * nf.p0 >= nf.p1 * nf.p1;
    rep.uniqueness_b = nf.q0 * nf.q0 >= nf.q1 * nf.q1 + nf.q2 * nf.q2;
    const double lhs = (nf.p0 * nf.q1 - nf.p1 * nf.q0) * (nf.p0 * nf.q1 - nf.p1 * nf.q0)
                     + nf.p0 * nf.q2 * nf.p0 * nf.q2;
    rep.uniqueness_c = lhs >= nf.p1 * nf.q2 * nf.p1 * nf.q2;
    rep.nullcline_monotone = nf.nullcline_monotone();
    rep.q2_sign = sign_of(nf.q2);
    if (!nf.g().is_zero()) {
        const CoefficientConditions c = check_coefficient_conditions(nf.g(), nf.f());
        rep.c1 = c.c1;
        rep.c2 = c.c2;
        rep.c2_resolution_warning = c.resolution_warning;
    }
    return rep;
}

} // namespace abel
