#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "abel/poincare.hpp"
#include "abel/structure.hpp"

namespace abel {

/// q0 is the rotated parameter: dS/dq0 = x^2 > 0 away from x = 0, so cycles
/// move monotonically in q0 and can only collide at folds.

struct ContinuationOptions {
    double step_init = 2e-4;
    double step_max = 2e-2;
    double step_min = 1e-10;
    double fold_multiplier_tol = 1e-6;  // |L'-1| at a reported fold
    double fold_handoff = 2e-3;         // |L'-1| at which stepping defers to the fold solver
    double collision_floor = 1e-6;      // |x_at_0| below this hits the zero orbit
    double fold_x_floor = 1e-3;         // fold amplitudes below this are the zero plateau
    double fold_significance = 30;      // H at 1.5 x_fold must exceed this multiple of restol
    double trust_frac = 0.3;            // corrector may not stray further from the predictor
    int max_points = 4000;
    double hyperbolicity_tol = 1e-4;
};

enum class BranchTermination { fold, range_end, cycle_lost, collision_with_zero };

inline const char* to_string(BranchTermination t) {
    switch (t) {
        case BranchTermination::fold: return "fold";
        case BranchTermination::range_end: return "range_end";
        case BranchTermination::cycle_lost: return "cycle_lost";
        default: return "collision_with_zero";
    }
}

struct FoldEvent {
    double q0 = 0;
    LimitCycle cycle;
    int lpp_sign = 0;
};

struct BranchPoint {
    double q0 = 0;
    LimitCycle cycle;
};

struct Branch {
    std::vector<BranchPoint> points;
    bool increasing_q0 = true;
    BranchTermination termination = BranchTermination::range_end;
    std::optional<FoldEvent> fold;
};

namespace detail {

inline NormalForm with_q0(NormalForm nf, double q0) {
    nf.q0 = q0;
    return nf;
}

struct CorrectorResult {
    enum class Status { ok, diverged, collision } status = Status::diverged;
    double x = 0;
    ReturnMapSample sample;
    int iterations = 0;
};

/// Newton on H(x) = P(x) - x from a predicted initial value; relative steps
/// are capped and a sign change of x is reported as a collision with 0.
inline CorrectorResult correct_cycle(const NormalForm& nf, double x_pred,
                                     const IntegratorConfig& cfg) {
    CorrectorResult res;
    double x = x_pred;
    double last_abs_H = std::numeric_limits<double>::infinity();
    int worse = 0;
    for (int it = 0; it < 30; ++it) {
        const ReturnMapSample s = return_map(nf, x, cfg);
        res.iterations = it + 1;
        if (!s.ok()) return res;
        if (x_pred * x <= 0.0) {
            res.status = CorrectorResult::Status::collision;
            return res;
        }
        if (std::fabs(s.H) < 1e-11 * std::max(1.0, std::fabs(x))) {
            res.status = CorrectorResult::Status::ok;
            res.x = x;
            res.sample = s;
            return res;
        }
        if (std::fabs(s.H) >= last_abs_H && ++worse >= 3) return res;
        last_abs_H = std::fabs(s.H);
        const double denom = s.Lp - 1.0;
        if (denom == 0.0) return res;
        double dx = -s.H / denom;
        const double cap = 0.25 * std::max(std::fabs(x_pred), 1e-3);
        if (std::fabs(dx) > cap) dx = dx > 0 ? cap : -cap;
        x += dx;
    }
    return res;
}

} // namespace detail

/// Fold refinement: 2D Newton on (H, L'-1) over (x, q0).  The Jacobian uses
/// the variational derivatives in x and central differences in q0; at a
/// quadratic fold the system is regular because dH/dq0 > 0 and L'' != 0.
inline std::optional<FoldEvent> locate_fold_in_q0(const NormalForm& nf, double x_guess,
                                                  double q0_guess,
                                                  const IntegratorConfig& cfg = {},
                                                  const ContinuationOptions& opt = {}) {
    double x = x_guess, q0 = q0_guess;
    for (int it = 0; it < 40; ++it) {
        // the zero orbit satisfies H = 0, L' = 1 for every q0; iterates that
        // wander into its plateau are not converging to a genuine fold
        if (std::fabs(x) < std::max(opt.collision_floor, opt.fold_x_floor))
            return std::nullopt;
        const ReturnMapSample s = return_map(detail::with_q0(nf, q0), x, cfg);
        if (!s.ok()) return std::nullopt;
        const double F1 = s.H, F2 = s.Lp - 1.0;
        if (std::fabs(F1) < 1e-12 * std::max(1.0, std::fabs(x))
            && std::fabs(F2) < opt.fold_multiplier_tol) {
            // significance probe: a real fold is an isolated tangency, so H
            // must be macroscopic a little further out on the same side
            const ReturnMapSample chk = return_map(detail::with_q0(nf, q0), 1.5 * x, cfg);
            if (chk.ok()
                && std::fabs(chk.H)
                       < opt.fold_significance * 1e-10 * std::max(1.0, 1.5 * std::fabs(x)))
                return std::nullopt;
            LimitCycle c = make_limit_cycle(nf.g(), detail::with_q0(nf, q0).f(), x,
                                            std::fabs(F1), cfg, opt.hyperbolicity_tol);
            FoldEvent ev;
            ev.q0 = q0;
            ev.lpp_sign = c.Lpp >= 0 ? +1 : -1;
            ev.cycle = std::move(c);
            return ev;
        }
        const double eps = 1e-7 * std::max(1.0, std::fabs(q0));
        const ReturnMapSample sp = return_map(detail::with_q0(nf, q0 + eps), x, cfg);
        const ReturnMapSample sm = return_map(detail::with_q0(nf, q0 - eps), x, cfg);
        if (!sp.ok() || !sm.ok()) return std::nullopt;
        const double J11 = s.Lp - 1.0, J12 = (sp.H - sm.H) / (2 * eps);
        const double J21 = s.Lpp, J22 = (sp.Lp - sm.Lp) / (2 * eps);
        const double det = J11 * J22 - J12 * J21;
        if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
        double dx = -(F1 * J22 - F2 * J12) / det;
        double dq = -(J11 * F2 - J21 * F1) / det;
        const double xcap = 0.2 * std::max(1.0, std::fabs(x));
        const double qcap = 0.1 * std::max(1.0, std::fabs(q0));
        if (std::fabs(dx) > xcap) dx *= xcap / std::fabs(dx);
        if (std::fabs(dq) > qcap) dq *= qcap / std::fabs(dq);
        x += dx;
        q0 += dq;
    }
    return std::nullopt;
}

/// Predictor-corrector continuation of a cycle in q0, from nf.q0 toward
/// q0_limit.  Terminates at the range end, at a fold (located by the 2D
/// Newton above), when the corrector loses the cycle, or when the cycle
/// collides with x = 0.
inline Branch continue_in_q0(const NormalForm& nf, const LimitCycle& start, bool increasing,
                             double q0_limit, const IntegratorConfig& cfg = {},
                             const ContinuationOptions& opt = {}) {
    Branch br;
    br.increasing_q0 = increasing;
    const double dir = increasing ? 1.0 : -1.0;
    if ((q0_limit - nf.q0) * dir < 0)
        throw std::invalid_argument("continue_in_q0: q0_limit on the wrong side");

    // the zero orbit is a constant branch: dS/dq0 vanishes on it
    if (std::fabs(start.x_at_0) < opt.collision_floor) {
        for (double q0 = nf.q0; (q0_limit - q0) * dir >= 0; q0 += dir * opt.step_max) {
            br.points.push_back(
                {q0, make_limit_cycle(nf.g(), detail::with_q0(nf, q0).f(), 0.0, 0.0, cfg,
                                      opt.hyperbolicity_tol)});
            if (static_cast<int>(br.points.size()) >= opt.max_points) break;
        }
        br.termination = BranchTermination::range_end;
        return br;
    }

    br.points.push_back({nf.q0, start});
    double dq = dir * opt.step_init;
    double last_handoff_dist = std::numeric_limits<double>::infinity();
    double prev_dist = std::fabs(start.multiplier - 1.0);

    while (static_cast<int>(br.points.size()) < opt.max_points) {
        const BranchPoint& last = br.points.back();
        if ((q0_limit - last.q0) * dir <= 0) {
            br.termination = BranchTermination::range_end;
            return br;
        }
        bool final_step = false;
        double q_next = last.q0 + dq;
        if ((q0_limit - q_next) * dir <= 0) {
            q_next = q0_limit;
            final_step = true;
        }

        double x_pred = last.cycle.x_at_0;
        if (br.points.size() >= 2) {
            const BranchPoint& prev = br.points[br.points.size() - 2];
            if (q_next != last.q0 && last.q0 != prev.q0)
                x_pred += (last.cycle.x_at_0 - prev.cycle.x_at_0) / (last.q0 - prev.q0)
                          * (q_next - last.q0);
        }

        detail::CorrectorResult cr =
            detail::correct_cycle(detail::with_q0(nf, q_next), x_pred, cfg);

        if (cr.status == detail::CorrectorResult::Status::collision
            || (cr.status == detail::CorrectorResult::Status::ok
                && std::fabs(cr.x) < opt.collision_floor)) {
            br.termination = BranchTermination::collision_with_zero;
            return br;
        }
        // a converged point far from the prediction is a jump onto some other
        // fixed point (typically the zero plateau past a fold), not this branch
        if (cr.status == detail::CorrectorResult::Status::ok
            && std::fabs(cr.x - x_pred)
                   > opt.trust_frac * std::max(std::fabs(x_pred), 1e-3))
            cr.status = detail::CorrectorResult::Status::diverged;

        if (cr.status == detail::CorrectorResult::Status::ok) {
            br.points.push_back(
                {q_next, make_limit_cycle(nf.g(), detail::with_q0(nf, q_next).f(), cr.x,
                                          std::fabs(cr.sample.H), cfg,
                                          opt.hyperbolicity_tol)});
            if (final_step) {
                br.termination = BranchTermination::range_end;
                return br;
            }
            const double dist = std::fabs(cr.sample.Lp - 1.0);
            if (dist < opt.fold_handoff && dist < 0.25 * last_handoff_dist) {
                last_handoff_dist = dist;
                auto ev = locate_fold_in_q0(detail::with_q0(nf, q_next), cr.x, q_next, cfg, opt);
                if (ev.has_value() && (ev->q0 - br.points.front().q0) * dir >= 0
                    && (q0_limit - ev->q0) * dir >= 0) {
                    br.termination = BranchTermination::fold;
                    br.fold = std::move(ev);
                    return br;
                }
            }
            // shrink when the multiplier is visibly collapsing toward 1,
            // otherwise let the step grow
            if (dist < 0.6 * prev_dist) dq *= 0.5;
            else if (cr.iterations <= 5) dq = std::min(std::fabs(dq) * 1.4, opt.step_max) * dir;
            prev_dist = dist;
            if (std::fabs(dq) < opt.step_min) {              // creep exhausted
                auto ev = locate_fold_in_q0(detail::with_q0(nf, q_next), cr.x, q_next, cfg, opt);
                if (ev.has_value() && (ev->q0 - br.points.front().q0) * dir >= 0
                    && (q0_limit - ev->q0) * dir >= 0) {
                    br.termination = BranchTermination::fold;
                    br.fold = std::move(ev);
                } else {
                    br.termination = BranchTermination::cycle_lost;
                }
                return br;
            }
            continue;
        }

        // corrector failed: shrink, and near multiplier 1 hand over to the
        // fold solver
        dq *= 0.5;
        if (std::fabs(dq) >= opt.step_min) continue;
        const double mdist = std::fabs(br.points.back().cycle.multiplier - 1.0);
        if (mdist < 0.05) {
            auto ev = locate_fold_in_q0(detail::with_q0(nf, br.points.back().q0),
                                        br.points.back().cycle.x_at_0,
                                        br.points.back().q0, cfg, opt);
            if (ev.has_value() && (ev->q0 - br.points.front().q0) * dir >= 0
                && (q0_limit - ev->q0) * dir >= 0) {
                br.termination = BranchTermination::fold;
                br.fold = std::move(ev);
                return br;
            }
        }
        br.termination = BranchTermination::cycle_lost;
        return br;
    }
    br.termination = BranchTermination::range_end;
    return br;
}

/// Monotonicity direction dictated by the rotated-family statement: stable
/// cycles move up as q0 increases, unstable cycles move down.
inline bool branch_motion_consistent(const Branch& br, double slack = 1e-9) {
    for (std::size_t i = 0; i + 1 < br.points.size(); ++i) {
        const BranchPoint &a = br.points[i], &b = br.points[i + 1];
        if (a.cycle.multiplicity != 1 || b.cycle.multiplicity != 1) continue;
        const double dq = br.increasing_q0 ? 1.0 : -1.0;
        const double dx = (b.cycle.x_at_0 - a.cycle.x_at_0) * dq;
        const double tol = slack * std::max(1.0, std::fabs(a.cycle.x_at_0));
        if (a.cycle.stability == Stability::stable && dx < -tol) return false;
        if (a.cycle.stability == Stability::unstable && dx > tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Hopf neighbourhood

/// Inventory of the perturbed equation (p0, q0) = (eps_p0, eps_q0) in a
/// window scaled to the perturbation.  The base form must sit at the
/// degenerate point p0 = q0 = 0 with p1 > 0 and q2 != 0.
inline CycleInventory hopf_inventory(const NormalForm& base, double eps_p0, double eps_q0,
                                     double window_cap = 10.0,
                                     const IntegratorConfig& cfg = {},
                                     const FindCyclesOptions& opt = {}) {
    if (base.p0 != 0.0 || base.q0 != 0.0)
        throw std::invalid_argument("hopf_inventory: base must have p0 = q0 = 0");
    if (!(base.p1 > 0.0) || base.q2 == 0.0)
        throw std::invalid_argument("hopf_inventory: base must have p1 > 0 and q2 != 0");
    if (eps_p0 < 0 || eps_q0 < 0)
        throw std::invalid_argument("hopf_inventory: perturbations must be >= 0");

    NormalForm nf = base;
    nf.p0 = eps_p0;
    nf.q0 = eps_q0;

    // outermost root of the quartic truncation of H bounds where the small
    // cycles can sit; scan a generous multiple of it
    const double pq = base.p1 * std::fabs(base.q2);
    const double R = (eps_p0 + std::sqrt(eps_p0 * eps_p0 + 2.0 * pq * eps_q0)) / pq;
    const double w = std::min(window_cap, std::max(8.0 * R, 1e-3));

    IntegratorConfig cfg_eff = cfg;
    cfg_eff.abs_tol = std::min(cfg.abs_tol, 1e-14);  // small-amplitude cycles
    return find_limit_cycles(nf, -w, w, cfg_eff, opt);
}

// ---------------------------------------------------------------------------
// The degenerate line p0 = q0 = 0

struct StabilitySignCheck {
    double x0 = 0;
    double log_multiplier = 0;
    int expected_sign = 0;  // sign(x) * sign(q2)
    bool match = false;
};

struct DegenerateLineReport {
    CycleInventory inventory;
    bool no_nonzero_cycles = false;
    std::vector<StabilitySignCheck> cycle_sign_checks;
};

/// At p0 = q0 = 0 no nonzero cycle should survive the scan; any candidate the
/// scan does produce is checked against the stability sign the symmetry
/// argument dictates (positive cycles unstable for q2 > 0, mirrored below).
inline DegenerateLineReport verify_degenerate_line(double p1, double q1, double q2, double window = 10.0,
                                    const IntegratorConfig& cfg = {},
                                    const FindCyclesOptions& opt = {}) {
    if (!(p1 > 0.0) || q2 == 0.0)
        throw std::invalid_argument("verify_degenerate_line: need p1 > 0 and q2 != 0");
    NormalForm nf;
    nf.p1 = p1;
    nf.q1 = q1;
    nf.q2 = q2;
    DegenerateLineReport rep;
    rep.inventory = find_limit_cycles(nf, -window, window, cfg, opt);
    rep.no_nonzero_cycles = rep.inventory.cycles.empty();
    for (const auto& c : rep.inventory.cycles) {
        StabilitySignCheck chk;
        chk.x0 = c.x_at_0;
        chk.log_multiplier = std::log(c.multiplier);
        chk.expected_sign = (c.x_at_0 > 0 ? 1 : -1) * (q2 > 0 ? 1 : -1);
        chk.match = chk.log_multiplier * chk.expected_sign > 0;
        rep.cycle_sign_checks.push_back(chk);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Sharpness witness

struct WitnessSearchBox {
    double p0_lo = 0.05, p0_hi = 0.35;
    double q0_lo = 0.0, q0_hi = 0.01;
    double q1_lo = 0.0, q1_hi = 0.0;
};

struct WitnessResult {
    bool found = false;
    NormalForm params;
    CycleInventory inventory;
    int evaluations = 0;
    int best_count = 0;
    NormalForm best_params;
};

/// Search near the p0 = q0 = 0 Hopf point (at p1 = 1, q2 = +-1) for
/// parameters whose full-window inventory holds exactly three cycles
/// including x = 0.  Deterministic ladder first (Hopf scaling q0 ~ p0^2),
/// then seeded random draws; every nonzero cycle of a hit is re-validated by
/// the geometry checks.
inline WitnessResult find_three_cycle_witness(unsigned seed, double q2_sign = 1.0,
                                              const WitnessSearchBox& box = {},
                                              double window = 10.0, int budget = 60,
                                              const IntegratorConfig& cfg = {},
                                              const FindCyclesOptions& opt = {}) {
    WitnessResult res;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> up0(box.p0_lo, box.p0_hi);
    std::uniform_real_distribution<double> uq0(box.q0_lo, box.q0_hi);
    std::uniform_real_distribution<double> uq1(box.q1_lo, box.q1_hi);

    auto clamp = [](double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); };

    std::vector<NormalForm> candidates;
    for (double p0 : {0.25, 0.3, 0.2, 0.35, 0.15, 0.1}) {
        NormalForm nf;
        nf.p1 = 1.0;
        nf.q2 = q2_sign;
        nf.p0 = clamp(p0, box.p0_lo, box.p0_hi);
        nf.q0 = clamp(0.05 * nf.p0 * nf.p0, box.q0_lo, box.q0_hi);
        nf.q1 = clamp(0.0, box.q1_lo, box.q1_hi);
        candidates.push_back(nf);
    }
    while (static_cast<int>(candidates.size()) < budget) {
        NormalForm nf;
        nf.p1 = 1.0;
        nf.q2 = q2_sign;
        nf.p0 = up0(rng);
        nf.q0 = uq0(rng);
        nf.q1 = box.q1_hi > box.q1_lo ? uq1(rng) : box.q1_lo;
        candidates.push_back(nf);
    }

    for (const NormalForm& nf : candidates) {
        if (res.evaluations >= budget) break;
        ++res.evaluations;
        CycleInventory inv = find_limit_cycles(nf, -window, window, cfg, opt);
        const int total = inv.total_count();
        if (total > res.best_count) {
            res.best_count = total;
            res.best_params = nf;
        }
        if (total != 3 || inv.cycles.size() != 2) continue;

        bool geometry_ok = true;
        for (const auto& c : inv.cycles) {
            const CycleGeometry geo = analyze_geometry(c, nf.g(), nf.f());
            if (!geo.ok) geometry_ok = false;
        }
        if (!geometry_ok) continue;

        res.found = true;
        res.params = nf;
        res.inventory = std::move(inv);
        return res;
    }
    return res;
}

} // namespace abel
