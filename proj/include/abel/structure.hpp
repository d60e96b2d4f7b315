#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "abel/model.hpp"
#include "abel/pchip.hpp"
#include "abel/poincare.hpp"

namespace abel {

struct GeometryOptions {
    int scan_samples = 4096;   // stationarity scan density along the orbit
    int interior_checks = 64;  // sign-table probes per interval
    double flat_tol = 1e-9;
};

/// Extremum structure of a located cycle: the unique minimum/maximum, the two
/// zeros t1 < t2 of g in [t_star, t_star + 2pi), and the four-interval sign
/// table of x - u.  `ok` is false when any of these fail, with the reason in
/// `violation` (and the offending interval in `violation_interval`).
struct CycleGeometry {
    double t_star = 0, x_star = 0;        // minimum
    double t_star_hi = 0, x_star_hi = 0;  // maximum, shifted into (t_star, t_star + 2pi)
    double t1 = 0, t2 = 0;
    int stationary_count = 0;
    bool sign_pattern_ok = false;
    Monotonicity u_monotonicity = Monotonicity::indefinite;
    bool ok = false;
    std::string violation;
    int violation_interval = -1;  // 0..3 when the sign table fails
    double violation_t = 0;
};

/// Stationary points of the cycle are the zeros of g(t) x(t) + f(t): both
/// extrema are located by bracketing that expression along the dense orbit.
/// The x - u signs are evaluated as sign((g x + f) g), never dividing by g.
inline CycleGeometry analyze_geometry(const LimitCycle& cycle, const TrigPoly& g,
                                      const TrigPoly& f, const GeometryOptions& opt = {}) {
    if (!cycle.orbit.valid())
        throw std::invalid_argument("analyze_geometry: cycle carries no orbit");
    CycleGeometry geo;

    auto phi = [&](double t) { return g.eval(t) * cycle.orbit.x(t) + f.eval(t); };

    std::vector<double> stationary;
    {
        const double h = two_pi / opt.scan_samples;
        double t0 = 0.0, v0 = phi(0.0);
        for (int i = 1; i <= opt.scan_samples; ++i) {
            const double t1 = i * h, v1 = phi(t1);
            if (v0 == 0.0) stationary.push_back(t0);
            else if (v0 * v1 < 0.0)
                stationary.push_back(bisect(phi, t0, t1, v0, v1, 1e-12).x);
            t0 = t1;
            v0 = v1;
        }
    }
    geo.stationary_count = static_cast<int>(stationary.size());
    if (geo.stationary_count != 2) {
        geo.violation = "stationary_count";
        return geo;
    }

    const double xa = cycle.orbit.x(stationary[0]), xb = cycle.orbit.x(stationary[1]);
    if (xa <= xb) {
        geo.t_star = stationary[0];
        geo.x_star = xa;
        geo.t_star_hi = stationary[1];
        geo.x_star_hi = xb;
    } else {
        geo.t_star = stationary[1];
        geo.x_star = xb;
        geo.t_star_hi = stationary[0];
        geo.x_star_hi = xa;
    }
    if (geo.x_star_hi - geo.x_star
        < opt.flat_tol * std::max(1.0, std::fabs(geo.x_star))) {
        geo.violation = "flat_orbit";
        return geo;
    }
    if (geo.t_star_hi < geo.t_star) geo.t_star_hi += two_pi;

    const std::vector<double> zeros = find_zeros(g);
    if (zeros.size() != 2) {
        geo.violation = "g_zero_count";
        return geo;
    }
    double z1 = zeros[0], z2 = zeros[1];
    while (z1 < geo.t_star) z1 += two_pi;
    while (z2 < geo.t_star) z2 += two_pi;
    geo.t1 = std::min(z1, z2);
    geo.t2 = std::max(z1, z2);

    if (!(geo.t1 < geo.t_star_hi && geo.t_star_hi < geo.t2)) {
        geo.violation = "maximum_outside_(t1,t2)";
        return geo;
    }

    geo.u_monotonicity = check_coefficient_conditions(g, f).c2;
    if (geo.u_monotonicity == Monotonicity::indefinite) {
        geo.violation = "u_monotonicity_indefinite";
        return geo;
    }

    // sign table on the four open intervals; for increasing u the
    // expected signs of x - u are (-, +, -, +), mirrored when decreasing.
    const std::array<std::pair<double, double>, 4> intervals = {
        std::pair{geo.t_star, geo.t1},
        std::pair{geo.t1, geo.t_star_hi},
        std::pair{geo.t_star_hi, geo.t2},
        std::pair{geo.t2, geo.t_star + two_pi},
    };
    const int base = geo.u_monotonicity == Monotonicity::increasing ? -1 : +1;
    for (int k = 0; k < 4; ++k) {
        const int expected = (k % 2 == 0) ? base : -base;
        const auto [lo, hi] = intervals[k];
        for (int j = 1; j <= opt.interior_checks; ++j) {
            const double t = lo + (hi - lo) * j / (opt.interior_checks + 1.0);
            const double v = phi(t) * g.eval(t);
            if (v * expected <= 0.0) {
                geo.violation = "sign_table";
                geo.violation_interval = k;
                geo.violation_t = t;
                return geo;
            }
        }
    }
    geo.sign_pattern_ok = true;
    geo.ok = true;
    return geo;
}

struct WProfileOptions {
    int h_nodes = 2048;        // quadrature nodes for h over one period
    int s_samples = 256;       // interior W samples
    double guard_frac = 1e-4;  // guard band at both ends of (x_star, x_star_hi)
    double wprime_floor = 1e-9;
    int lpp_quad_panels = 48;      // quadrature panels for the L'' integral
    double monotone_clip_frac = 0.05;
};

/// The h / W diagnostic of a located cycle: h(t) = int g x^2 from t_star,
/// W(s) = h(tau1(s)) - h(tau2(s)) on the branch inverses, the sampled W',
/// and the second-derivative estimate
///   Lpp_closed_form = -(2/x_star^2) int (exp h(tau1) - exp h(tau2)) dx.
struct WProfile {
    std::vector<std::pair<double, double>> h_samples;
    std::vector<std::array<double, 3>> w_samples;  // (s, W, W')
    int wprime_sign_changes = 0;
    double h_period_residual = 0;
    double closed_form_integral = 0;
    double Lpp_closed_form = 0;
    double w_at_min_end = 0;  // W evaluated at x_star
    double w_at_max_end = 0;  // W evaluated at x_star_hi
    double x_star = 0, x_star_hi = 0;
    double source_multiplier = 1;
    bool branch_monotone_ok = true;
    std::string violation;
};

inline WProfile compute_W_profile(const LimitCycle& cycle, const TrigPoly& g,
                                  const CycleGeometry& geo, const WProfileOptions& opt = {}) {
    if (!cycle.orbit.valid())
        throw std::invalid_argument("compute_W_profile: cycle carries no orbit");
    WProfile wp;
    wp.x_star = geo.x_star;
    wp.x_star_hi = geo.x_star_hi;
    wp.source_multiplier = cycle.multiplier;

    const double ta = geo.t_star, tb = geo.t_star + two_pi;
    auto integrand = [&](double t) {
        const double x = cycle.orbit.x(t);
        return g.eval(t) * x * x;
    };

    // cumulative h on a uniform node grid, one Gauss panel per interval
    const int n = opt.h_nodes;
    std::vector<double> tg(n + 1), hg(n + 1);
    tg[0] = ta;
    hg[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
        tg[i] = ta + (tb - ta) * i / n;
        hg[i] = hg[i - 1] + gl5_on_interval(integrand, tg[i - 1], tg[i]);
    }
    wp.h_period_residual = hg[n];
    wp.h_samples.reserve(n + 1);
    for (int i = 0; i <= n; ++i) wp.h_samples.emplace_back(tg[i], hg[i]);

    auto h_at = [&](double t) {
        double u = std::clamp(t, ta, tb);
        const double pos = (u - ta) / (tb - ta) * n;
        int i = std::min(static_cast<int>(pos), n - 1);
        return hg[i] + gl5_on_interval(integrand, tg[i], u);
    };

    // branch inverses tau1 (rising, [t_star, t^*]) and tau2 (falling,
    // [t^*, t_star + 2pi]) as monotone interpolants over orbit samples,
    // clipped to strict monotonicity
    auto build_branch = [&](double lo, double hi, bool rising) -> std::optional<MonotoneCubic> {
        const int m = std::max(64, opt.h_nodes / 4);
        std::vector<double> xs, ts;
        xs.reserve(m + 1);
        ts.reserve(m + 1);
        int dropped = 0;
        for (int i = 0; i <= m; ++i) {
            const double t = lo + (hi - lo) * i / m;
            const double x = cycle.orbit.x(t);
            const double key = rising ? x : -x;
            if (!xs.empty() && key <= xs.back()) {
                ++dropped;
                continue;
            }
            xs.push_back(key);
            ts.push_back(t);
        }
        if (dropped > opt.monotone_clip_frac * m || xs.size() < 8) return std::nullopt;
        return MonotoneCubic(std::move(xs), std::move(ts));
    };

    const std::optional<MonotoneCubic> tau1_raw = build_branch(geo.t_star, geo.t_star_hi, true);
    const std::optional<MonotoneCubic> tau2_raw = build_branch(geo.t_star_hi, tb, false);
    if (!tau1_raw || !tau2_raw) {
        wp.branch_monotone_ok = false;
        wp.violation = "branch_non_monotone";
        return wp;
    }
    auto tau1 = [&](double s) { return tau1_raw->eval(s); };
    auto tau2 = [&](double s) { return tau2_raw->eval(-s); };

    // sampled W and W'; W' uses tau_i'(s) = 1 / x'(tau_i(s)) from the dense
    // orbit derivative, which stays finite away from the guard bands
    const double span = geo.x_star_hi - geo.x_star;
    const double guard = opt.guard_frac * span;
    const double s_lo = geo.x_star + guard, s_hi = geo.x_star_hi - guard;
    wp.w_samples.reserve(opt.s_samples);
    for (int k = 0; k < opt.s_samples; ++k) {
        const double s = s_lo + (s_hi - s_lo) * (k + 0.5) / opt.s_samples;
        const double u1 = tau1(s), u2 = tau2(s);
        const double W = h_at(u1) - h_at(u2);
        const double s2 = s * s;
        const double Wp = g.eval(u1) * s2 / cycle.orbit.xdot(u1)
                        - g.eval(u2) * s2 / cycle.orbit.xdot(u2);
        wp.w_samples.push_back({s, W, Wp});
    }

    int last_sign = 0;
    for (const auto& row : wp.w_samples) {
        const double v = row[2];
        const int sgn = std::fabs(v) < opt.wprime_floor ? 0 : (v > 0 ? 1 : -1);
        if (sgn != 0) {
            if (last_sign != 0 && sgn != last_sign) ++wp.wprime_sign_changes;
            last_sign = sgn;
        }
    }

    wp.w_at_min_end = h_at(tau1(geo.x_star)) - h_at(tau2(geo.x_star));
    wp.w_at_max_end = h_at(tau1(geo.x_star_hi)) - h_at(tau2(geo.x_star_hi));

    // closed-form integral under a cosine substitution, which absorbs the
    // square-root behaviour of tau at both endpoints
    const double half_pi = 0.25 * two_pi;
    auto Fu = [&](double u) {
        const double s = geo.x_star + span * 0.5 * (1.0 - std::cos(2 * half_pi * u));
        const double dxdu = span * half_pi * std::sin(2 * half_pi * u);
        return (std::exp(h_at(tau1(s))) - std::exp(h_at(tau2(s)))) * dxdu;
    };
    double acc = 0.0;
    for (int k = 0; k < opt.lpp_quad_panels; ++k)
        acc += gl5_on_interval(Fu, static_cast<double>(k) / opt.lpp_quad_panels,
                               static_cast<double>(k + 1) / opt.lpp_quad_panels);
    wp.closed_form_integral = acc;
    wp.Lpp_closed_form = -2.0 / (geo.x_star * geo.x_star) * acc;
    return wp;
}

/// The closed-form second derivative at a non-hyperbolic cycle.  Requires the
/// source cycle to sit close to multiplier 1; the formula presumes L' = 1.
inline double second_derivative_closed_form(const WProfile& profile, double x_star,
                                     double multiplier_tol = 1e-3) {
    if (std::fabs(profile.source_multiplier - 1.0) >= multiplier_tol)
        throw std::domain_error("second_derivative_closed_form: cycle is not near-fold");
    return -2.0 / (x_star * x_star) * profile.closed_form_integral;
}

} // namespace abel
