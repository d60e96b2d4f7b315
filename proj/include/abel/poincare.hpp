#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "abel/integrator.hpp"
#include "abel/model.hpp"
#include "abel/parallel.hpp"
#include "abel/rk.hpp"

namespace abel {

/// One sample of the period-2pi return map at the t = 0 section.
struct ReturnMapSample {
    double x0 = 0;
    double P = 0, H = 0, Lp = 0, Lpp = 0;
    IntegrationStatus status = IntegrationStatus::step_failure;

    bool ok() const { return status == IntegrationStatus::complete; }
};

inline ReturnMapSample return_map(const TrigPoly& g, const TrigPoly& f, double x0,
                                  const IntegratorConfig& cfg = {}) {
    const VariationalResult r = integrate_variational(g, f, x0, 0.0, cfg);
    ReturnMapSample s;
    s.x0 = x0;
    s.status = r.status;
    if (r.complete()) {
        s.P = r.P;
        s.H = r.P - x0;
        s.Lp = r.Lp;
        s.Lpp = r.Lpp;
    }
    return s;
}

inline ReturnMapSample return_map(const NormalForm& nf, double x0,
                                  const IntegratorConfig& cfg = {}) {
    return return_map(nf.g(), nf.f(), x0, cfg);
}

// ---------------------------------------------------------------------------
// Zero orbit

enum class ZeroStability {
    upper_unstable_lower_stable,
    upper_unstable_lower_unstable,
    upper_stable_lower_unstable,
    upper_stable_lower_stable,
};

inline const char* to_string(ZeroStability s) {
    switch (s) {
        case ZeroStability::upper_unstable_lower_stable: return "upper_unstable_lower_stable";
        case ZeroStability::upper_unstable_lower_unstable:
            return "upper_unstable_lower_unstable";
        case ZeroStability::upper_stable_lower_unstable: return "upper_stable_lower_unstable";
        default: return "upper_stable_lower_stable";
    }
}

/// Multiplicity and stability of the orbit x = 0 from the closed-form
/// Lyapunov constants L2 = 2 pi q0, L3 = 2 pi p0 (when L2 = 0) and
/// L4 = pi p1 q2 (when L2 = L3 = 0).  multiplicity 0 encodes
/// "center suspected" (all three constants vanish).
struct ZeroOrbitClass {
    int multiplicity = 0;  // 2, 3, 4, or 0 for center_suspected
    ZeroStability stability = ZeroStability::upper_unstable_lower_stable;
    std::optional<double> L2, L3, L4;

    bool center_suspected() const { return multiplicity == 0; }
    bool is_limit_cycle() const { return multiplicity != 0; }
};

/// Constants are taken in whatever frame the coefficients live in:
/// f_mean and g_mean are the constant terms of f and g, and cross is the
/// rotation invariant a1 b2 - a2 b1 (= p1 q2 in the normal-form frame).
inline ZeroOrbitClass classify_zero_orbit_from_constants(double f_mean, double g_mean,
                                                         double cross) {
    constexpr double pi = 0.5 * two_pi;
    ZeroOrbitClass z;
    z.L2 = two_pi * f_mean;
    if (*z.L2 != 0.0) {
        z.multiplicity = 2;
        z.stability = (*z.L2 > 0) ? ZeroStability::upper_unstable_lower_stable
                                  : ZeroStability::upper_stable_lower_unstable;
        return z;
    }
    z.L3 = two_pi * g_mean;
    if (*z.L3 != 0.0) {
        z.multiplicity = 3;
        z.stability = (*z.L3 > 0) ? ZeroStability::upper_unstable_lower_unstable
                                  : ZeroStability::upper_stable_lower_stable;
        return z;
    }
    z.L4 = pi * cross;
    if (*z.L4 != 0.0) {
        z.multiplicity = 4;
        z.stability = (*z.L4 > 0) ? ZeroStability::upper_unstable_lower_stable
                                  : ZeroStability::upper_stable_lower_unstable;
        return z;
    }
    z.multiplicity = 0;  // center suspected; needs all three constants to vanish
    return z;
}

inline ZeroOrbitClass classify_zero_orbit(const NormalForm& nf) {
    return classify_zero_orbit_from_constants(nf.q0, nf.p0, nf.p1 * nf.q2);
}

inline ZeroOrbitClass classify_zero_orbit(const AbelParams& p) {
    return classify_zero_orbit_from_constants(p.b0, p.a0, p.a1 * p.b2 - p.a2 * p.b1);
}

// ---------------------------------------------------------------------------
// Limit cycles

enum class Stability {
    stable,
    unstable,
    lower_stable_upper_unstable,
    lower_unstable_upper_stable,
};

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::lower_stable_upper_unstable: return "lower_stable_upper_unstable";
        default: return "lower_unstable_upper_stable";
    }
}

/// Dense one-period orbit of a located cycle, shared immutably.  Evaluation
/// outside [0, 2pi] wraps periodically, which for a located cycle is exact up
/// to the fixed-point residual.
class CycleOrbit {
public:
    CycleOrbit() = default;
    explicit CycleOrbit(DenseSolution<3> sol)
        : sol_(std::make_shared<DenseSolution<3>>(std::move(sol))) {}

    bool valid() const { return sol_ != nullptr; }

    double x(double t) const {
        double u = std::fmod(t, two_pi);
        if (u < 0) u += two_pi;
        return sol_->eval(u)[0];
    }

    double xdot(double t) const {
        double u = std::fmod(t, two_pi);
        if (u < 0) u += two_pi;
        return sol_->deriv(u)[0];
    }

    const DenseSolution<3>& dense() const { return *sol_; }

private:
    std::shared_ptr<const DenseSolution<3>> sol_;
};

struct LimitCycle {
    double x_at_0 = 0;     // canonical label: value at the t = 0 section
    double x_star = 0;     // minimum over one period
    double t_star = 0;
    double multiplier = 1; // L' at the cycle
    double Lpp = 0;        // variational L''
    int multiplicity = 1;  // 1 or 2
    Stability stability = Stability::stable;
    double residual = 0;   // |H| left after refinement
    CycleOrbit orbit;
};

struct CycleInventory {
    std::vector<LimitCycle> cycles;  // nonzero cycles, ordered by x_at_0
    ZeroOrbitClass zero_orbit;
    double window_lo = 0, window_hi = 0;
    std::vector<std::pair<double, double>> escape_intervals;
    bool window_unresolved = false;
    std::vector<std::pair<double, double>> unresolved_pairs;

    int count_positive() const {
        int n = 0;
        for (const auto& c : cycles) n += (c.x_at_0 > 0);
        return n;
    }
    int count_negative() const {
        int n = 0;
        for (const auto& c : cycles) n += (c.x_at_0 < 0);
        return n;
    }
    /// Total count including x = 0 when it is an isolated cycle.
    int total_count() const {
        return static_cast<int>(cycles.size()) + (zero_orbit.is_limit_cycle() ? 1 : 0);
    }
};

struct FindCyclesOptions {
    int grid_per_side = 512;
    double hyperbolicity_tol = 1e-4;  // |L'-1| below this routes through L''
    double dedup_tol = 1e-7;
    double log_floor_ratio = 1e-6;    // innermost grid point, relative to the extent
    // |H| below bracket_noise_factor * (abs_tol + rel_tol |x|) is treated as
    // integrator noise, not a sign change; this sets the resolution limit for
    // small cycles and keeps centers from producing spurious roots
    double bracket_noise_factor = 10;
    double double_zero_exclusion = 1e-4;  // no fold probing closer to 0 than this
};

/// Assemble a LimitCycle at a refined fixed point: variational solve for the
/// multiplier and L'', dense orbit, period minimum, classification.
inline LimitCycle make_limit_cycle(const TrigPoly& g, const TrigPoly& f, double x0,
                                   double residual, const IntegratorConfig& cfg = {},
                                   double hyperbolicity_tol = 1e-4) {
    DenseSolution<3> sol = integrate_variational_dense(g, f, x0, 0.0, cfg);
    LimitCycle c;
    c.x_at_0 = x0;
    c.residual = residual;
    if (sol.status == IntegrationStatus::complete) {
        c.multiplier = sol.back()[1];
        c.Lpp = sol.back()[2];
    }
    c.orbit = CycleOrbit(std::move(sol));

    // minimum over the period: coarse scan plus parabolic refinement
    int kmin = 0;
    double xmin = c.orbit.x(0.0);
    const int nscan = 2048;
    for (int k = 1; k < nscan; ++k) {
        const double v = c.orbit.x(two_pi * k / nscan);
        if (v < xmin) {
            xmin = v;
            kmin = k;
        }
    }
    const double h = two_pi / nscan;
    const double tm = two_pi * kmin / nscan;
    const double ym = c.orbit.x(tm - h), yp = c.orbit.x(tm + h);
    const double denom = ym - 2 * xmin + yp;
    double ts = tm;
    if (denom > 0) ts = tm + 0.5 * h * (ym - yp) / denom;
    c.t_star = ts;
    c.x_star = c.orbit.x(ts);

    if (std::fabs(c.multiplier - 1.0) >= hyperbolicity_tol) {
        c.multiplicity = 1;
        c.stability = c.multiplier < 1.0 ? Stability::stable : Stability::unstable;
    } else {
        c.multiplicity = 2;
        c.stability = c.Lpp >= 0.0 ? Stability::lower_stable_upper_unstable
                                   : Stability::lower_unstable_upper_stable;
    }
    return c;
}

namespace detail {

/// Per-side grid: uniform points for coverage, log-spaced points piled
/// toward zero where H degenerates.  `extent` > 0; sign applied by caller.
inline std::vector<double> side_grid(double extent, int n, double floor_ratio) {
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(n) + 2);
    const int nu = n / 2, nl = n - n / 2;
    for (int i = 1; i <= nu; ++i) xs.push_back(extent * i / nu);
    const double lo = extent * floor_ratio;
    const double ratio = std::pow(extent / lo, 1.0 / std::max(1, nl - 1));
    double v = lo;
    for (int i = 0; i < nl; ++i, v *= ratio) xs.push_back(std::min(v, extent));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

struct RootCandidate {
    double x = 0;
    double residual = 0;
    bool from_fold_probe = false;
};

} // namespace detail

/// Scan the return map over the window, bracket all sign changes of
/// H = P - x0 inside the returning domain, refine each root, probe for
/// double cycles at interior |H| minima with multiplier near 1, classify,
/// and attach the zero-orbit closed form.
inline CycleInventory find_limit_cycles(const TrigPoly& g, const TrigPoly& f,
                                        const ZeroOrbitClass& zero, double x_lo, double x_hi,
                                        const IntegratorConfig& cfg = {},
                                        const FindCyclesOptions& opt = {}) {
    CycleInventory inv;
    inv.zero_orbit = zero;
    inv.window_lo = x_lo;
    inv.window_hi = x_hi;

    // grid over both sides of 0, never sampling 0 itself
    std::vector<double> grid;
    if (x_lo < 0) {
        auto neg = detail::side_grid(-x_lo, opt.grid_per_side, opt.log_floor_ratio);
        for (auto it = neg.rbegin(); it != neg.rend(); ++it) grid.push_back(-*it);
    }
    if (x_hi > 0) {
        auto pos = detail::side_grid(x_hi, opt.grid_per_side, opt.log_floor_ratio);
        for (double v : pos) grid.push_back(v);
    }
    if (grid.empty()) return inv;

    std::vector<ReturnMapSample> samples(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { samples[i] = return_map(g, f, grid[i], cfg); });

    // escape intervals at grid resolution
    for (std::size_t i = 0; i < samples.size();) {
        if (samples[i].ok()) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < samples.size() && !samples[j + 1].ok()) ++j;
        inv.escape_intervals.emplace_back(grid[i], grid[j]);
        i = j + 1;
    }

    auto restol = [](double x) { return 1e-10 * std::max(1.0, std::fabs(x)); };
    auto width_tol = [](double x) { return 1e-11 * std::max(1.0, std::fabs(x)); };

    std::vector<detail::RootCandidate> roots;

    // a bracketed root is refined by Newton steps on H (H' = L'-1) clipped to
    // the bracket, with bisection whenever Newton stalls or exits
    auto refine = [&](double a, double b, ReturnMapSample sa, ReturnMapSample sb) {
        double best_x = std::fabs(sa.H) < std::fabs(sb.H) ? a : b;
        double best_H = std::fabs(sa.H) < std::fabs(sb.H) ? sa.H : sb.H;
        double Lp_best = std::fabs(sa.H) < std::fabs(sb.H) ? sa.Lp : sb.Lp;
        for (int it = 0; it < 90 && b - a > width_tol(best_x); ++it) {
            double xn = best_x - best_H / (Lp_best - 1.0);
            if (!(Lp_best != 1.0) || !(xn > a) || !(xn < b) || xn == best_x)
                xn = 0.5 * (a + b);
            const ReturnMapSample s = return_map(g, f, xn, cfg);
            if (!s.ok()) {  // retreat: shrink toward the midpoint deterministically
                if (xn > 0.5 * (a + b)) b = xn;
                else a = xn;
                continue;
            }
            if (sa.H * s.H <= 0.0) {
                b = xn;
                sb = s;
            } else {
                a = xn;
                sa = s;
            }
            if (std::fabs(s.H) < std::fabs(best_H)) {
                best_x = xn;
                best_H = s.H;
                Lp_best = s.Lp;
            }
        }
        if (std::fabs(best_H) <= restol(best_x))
            roots.push_back({best_x, std::fabs(best_H), false});
    };

    auto noise_floor = [&](double x) {
        return opt.bracket_noise_factor * (cfg.abs_tol + cfg.rel_tol * std::fabs(x));
    };
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const ReturnMapSample &sa = samples[i], &sb = samples[i + 1];
        if (!sa.ok() || !sb.ok()) continue;              // never bracket across escape
        if (grid[i] < 0 && grid[i + 1] > 0) continue;    // never bracket across 0
        if (sa.H * sb.H < 0.0 && std::fabs(sa.H) > noise_floor(sa.x0)
            && std::fabs(sb.H) > noise_floor(sb.x0))
            refine(grid[i], grid[i + 1], sa, sb);
    }

    // fold probe: interior minima of |H| with multiplier crossing 1 and no
    // sign change of H nearby
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        const ReturnMapSample &sl = samples[i - 1], &sm = samples[i], &sr = samples[i + 1];
        if (!sl.ok() || !sm.ok() || !sr.ok()) continue;
        if (grid[i - 1] < 0 && grid[i + 1] > 0) continue;
        if (std::fabs(grid[i]) < opt.double_zero_exclusion) continue;
        if (sl.H * sm.H <= 0.0 || sm.H * sr.H <= 0.0) continue;  // handled as simple roots
        if (std::fabs(sm.H) >= std::fabs(sl.H) || std::fabs(sm.H) > std::fabs(sr.H)) continue;
        // need L'-1 to change sign across the triple
        double a = grid[i - 1], b = grid[i + 1];
        double da = sl.Lp - 1.0, db = sr.Lp - 1.0;
        if (da * db > 0.0) continue;
        double xc = grid[i], Hc = sm.H;
        for (int it = 0; it < 60 && b - a > width_tol(xc); ++it) {
            const double m = 0.5 * (a + b);
            const ReturnMapSample s = return_map(g, f, m, cfg);
            if (!s.ok()) break;
            if (da * (s.Lp - 1.0) <= 0.0) b = m;
            else {
                a = m;
                da = s.Lp - 1.0;
            }
            xc = m;
            Hc = s.H;
        }
        if (std::fabs(Hc) <= restol(xc)) roots.push_back({xc, std::fabs(Hc), true});
    }

    std::sort(roots.begin(), roots.end(),
              [](const auto& l, const auto& r) { return l.x < r.x; });

    // converged duplicates of one root collapse; genuinely close pairs are
    // kept and flagged
    std::vector<detail::RootCandidate> unique_roots;
    for (const auto& r : roots) {
        if (!unique_roots.empty()
            && std::fabs(r.x - unique_roots.back().x) <= 1e-9 * std::max(1.0, std::fabs(r.x)))
            continue;
        unique_roots.push_back(r);
    }
    for (std::size_t i = 0; i + 1 < unique_roots.size(); ++i) {
        if (unique_roots[i + 1].x - unique_roots[i].x < 2 * opt.dedup_tol) {
            inv.window_unresolved = true;
            inv.unresolved_pairs.emplace_back(unique_roots[i].x, unique_roots[i + 1].x);
        }
    }

    inv.cycles.resize(unique_roots.size());
    parallel_for(unique_roots.size(), [&](std::size_t i) {
        inv.cycles[i] = make_limit_cycle(g, f, unique_roots[i].x, unique_roots[i].residual,
                                         cfg, opt.hyperbolicity_tol);
    });

    return inv;
}

inline CycleInventory find_limit_cycles(const NormalForm& nf, double x_lo, double x_hi,
                                        const IntegratorConfig& cfg = {},
                                        const FindCyclesOptions& opt = {}) {
    return find_limit_cycles(nf.g(), nf.f(), classify_zero_orbit(nf), x_lo, x_hi, cfg, opt);
}

inline CycleInventory find_limit_cycles(const AbelParams& p, double x_lo, double x_hi,
                                        const IntegratorConfig& cfg = {},
                                        const FindCyclesOptions& opt = {}) {
    return find_limit_cycles(p.g(), p.f(), classify_zero_orbit(p), x_lo, x_hi, cfg, opt);
}

/// Consecutive hyperbolic cycles with nothing between them must have
/// multipliers on opposite sides of 1.  Pairs separated by x = 0, an escape
/// interval, or a non-hyperbolic cycle are skipped.
inline bool stability_alternates(const CycleInventory& inv) {
    for (std::size_t i = 0; i + 1 < inv.cycles.size(); ++i) {
        const LimitCycle &a = inv.cycles[i], &b = inv.cycles[i + 1];
        if (a.multiplicity != 1 || b.multiplicity != 1) continue;
        if (a.x_at_0 < 0 && b.x_at_0 > 0) continue;
        bool gap = false;
        for (const auto& [lo, hi] : inv.escape_intervals)
            if (lo > a.x_at_0 && hi < b.x_at_0) gap = true;
        if (gap) continue;
        if ((a.multiplier < 1.0) == (b.multiplier < 1.0)) return false;
    }
    return true;
}

/// Least-squares-free estimate of the Lyapunov constant L_k of x = 0:
/// symmetric pairs H(x)/x^k +- H(-x)/x^k cancel the next-order term.
inline double fit_lyapunov(const TrigPoly& g, const TrigPoly& f, int order,
                           const IntegratorConfig& cfg = {}) {
    const std::vector<double> xs = (order >= 4)
        ? std::vector<double>{0.005, 0.0075, 0.011, 0.017, 0.025}
        : std::vector<double>{0.002, 0.003, 0.0045, 0.007, 0.01};
    double acc = 0.0;
    int n = 0;
    for (double x : xs) {
        const ReturnMapSample sp = return_map(g, f, x, cfg);
        const ReturnMapSample sm = return_map(g, f, -x, cfg);
        if (!sp.ok() || !sm.ok()) continue;
        const double sgn = (order % 2 == 0) ? 1.0 : -1.0;
        acc += (sp.H + sgn * sm.H) / (2.0 * std::pow(x, order));
        ++n;
    }
    return n > 0 ? acc / n : 0.0;
}

inline double fit_lyapunov(const NormalForm& nf, int order, const IntegratorConfig& cfg = {}) {
    return fit_lyapunov(nf.g(), nf.f(), order, cfg);
}

} // namespace abel
