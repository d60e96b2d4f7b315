// Acceptance suite: every headline claim is exercised end to end at desk
// scale, one PASS/FAIL line per criterion.  Exit code is the number of
// failing criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "abel/abel.hpp"

using namespace abel;

namespace {

struct Criterion {
    int number;
    std::string title;
    double budget_seconds;
    std::function<bool(std::string&)> body;
};

NormalForm make_nf(double p0, double p1, double q0, double q1, double q2) {
    NormalForm nf;
    nf.p0 = p0;
    nf.p1 = p1;
    nf.q0 = q0;
    nf.q1 = q1;
    nf.q2 = q2;
    return nf;
}

// cycles collected from criteria 4-8 whenever the coefficient conditions hold;
// criterion 9 replays the geometry checks on all of them
struct CollectedCycle {
    TrigPoly g, f;
    LimitCycle cycle;
};
std::vector<CollectedCycle> g_collected;

void collect(const TrigPoly& g, const TrigPoly& f, const CycleInventory& inv) {
    const CoefficientConditions c = check_coefficient_conditions(g, f);
    if (!c.c1 || c.c2 == Monotonicity::indefinite) return;
    for (const auto& cyc : inv.cycles) g_collected.push_back({g, f, cyc});
}

char fmt_buf[256];

// --------------------------------------------------------------------------

bool criterion1(std::string& detail) {
    const TrigPoly zero = TrigPoly::constant(0);
    double val_err = 0, der_err = 0;
    {
        const double b0 = 1.0 / two_pi;
        const TrigPoly f = TrigPoly::constant(b0);
        for (int i = 0; i < 50; ++i) {
            const double x0 = -2.0 + 2.9 * i / 49.0;
            const auto m = closed_form_return_map(ClosedFormCase::riccati, b0, x0);
            const VariationalResult r = integrate_variational(zero, f, x0, 0.0);
            if (!m || !r.complete()) return false;
            if (std::fabs(m->P) > 1e-12)
                val_err = std::max(val_err, std::fabs(r.P - m->P) / std::fabs(m->P));
            der_err = std::max(der_err, std::fabs(r.Lp - m->Lp) / std::fabs(m->Lp));
            der_err = std::max(der_err, std::fabs(r.Lpp - m->Lpp) / std::fabs(m->Lpp));
        }
    }
    {
        const double a0 = 1.0 / (2 * two_pi);
        const TrigPoly g = TrigPoly::constant(a0);
        for (int i = 0; i < 50; ++i) {
            const double x0 = -0.9 + 1.8 * i / 49.0;
            const auto m = closed_form_return_map(ClosedFormCase::cubic, a0, x0);
            const VariationalResult r = integrate_variational(g, zero, x0, 0.0);
            if (!m || !r.complete()) return false;
            if (std::fabs(m->P) > 1e-12)
                val_err = std::max(val_err, std::fabs(r.P - m->P) / std::fabs(m->P));
            der_err = std::max(der_err, std::fabs(r.Lp - m->Lp) / std::fabs(m->Lp));
            if (std::fabs(m->Lpp) > 1e-12)
                der_err = std::max(der_err, std::fabs(r.Lpp - m->Lpp) / std::fabs(m->Lpp));
        }
    }
    std::snprintf(fmt_buf, sizeof fmt_buf, "max value err %.2e (<1e-8), deriv err %.2e (<1e-6)",
                  val_err, der_err);
    detail = fmt_buf;
    return val_err < 1e-8 && der_err < 1e-6;
}

bool criterion2(std::string& detail) {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double max_err = 0;
    int done = 0;
    while (done < 100) {
        const TrigPoly g = TrigPoly::linear(u(rng), u(rng), u(rng));
        const TrigPoly f = TrigPoly::linear(u(rng), u(rng), u(rng));
        const double x0 = 0.5 * u(rng);
        const DenseSolution<3> sol = integrate_variational_dense(g, f, x0, 0.0);
        if (sol.status != IntegrationStatus::complete) continue;
        ++done;
        const double Lp = sol.back()[1];
        max_err = std::max(max_err,
                           std::fabs(multiplier_via_quadrature(g, f, sol) - Lp) / std::fabs(Lp));
    }
    std::snprintf(fmt_buf, sizeof fmt_buf, "100 instances, max rel err %.2e (<1e-8)", max_err);
    detail = fmt_buf;
    return max_err < 1e-8;
}

bool criterion3(std::string& detail) {
    const double pi = 0.5 * two_pi;
    bool ok = true;
    double worst = 0;
    auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-14 * std::fabs(b); };
    auto fit_check = [&](const NormalForm& nf, int order, double closed) {
        const double fit = fit_lyapunov(nf, order);
        const double rel = std::fabs(fit - closed) / std::fabs(closed);
        worst = std::max(worst, rel);
        ok = ok && rel < 0.01;
    };
    {  // q0 > 0: multiplicity 2, upper-unstable lower-stable
        const NormalForm nf = make_nf(0.4, 1, 0.37, -0.2, 0.8);
        const ZeroOrbitClass z = classify_zero_orbit(nf);
        ok = ok && z.multiplicity == 2 && close(*z.L2, two_pi * nf.q0)
             && z.stability == ZeroStability::upper_unstable_lower_stable;
        fit_check(nf, 2, two_pi * nf.q0);
    }
    {  // q0 = 0, p0 > 0: multiplicity 3, unstable both sides
        const NormalForm nf = make_nf(0.55, 1, 0, 0.3, 0.7);
        const ZeroOrbitClass z = classify_zero_orbit(nf);
        ok = ok && z.multiplicity == 3 && close(*z.L3, two_pi * nf.p0)
             && z.stability == ZeroStability::upper_unstable_lower_unstable;
        fit_check(nf, 3, two_pi * nf.p0);
    }
    {  // p0 = q0 = 0, q2 > 0: multiplicity 4, upper-unstable lower-stable
        const NormalForm nf = make_nf(0, 1.3, 0, 0.3, 0.9);
        const ZeroOrbitClass z = classify_zero_orbit(nf);
        ok = ok && z.multiplicity == 4 && close(*z.L4, pi * nf.p1 * nf.q2)
             && z.stability == ZeroStability::upper_unstable_lower_stable;
        fit_check(nf, 4, pi * nf.p1 * nf.q2);
    }
    {  // p0 = q0 = 0, q2 < 0: multiplicity 4, upper-stable lower-unstable
        const NormalForm nf = make_nf(0, 1, 0, 0, -0.6);
        const ZeroOrbitClass z = classify_zero_orbit(nf);
        ok = ok && z.multiplicity == 4 && close(*z.L4, pi * nf.p1 * nf.q2)
             && z.stability == ZeroStability::upper_stable_lower_unstable;
        fit_check(nf, 4, pi * nf.p1 * nf.q2);
    }
    std::snprintf(fmt_buf, sizeof fmt_buf, "4 rows, worst fit deviation %.3f%% (<1%%)",
                  100 * worst);
    detail = fmt_buf;
    return ok;
}

bool criterion4(std::string& detail) {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int done = 0, worst = 0;
    while (done < 200) {
        const AbelParams p{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
        const HypothesisReport rep = classify_hypotheses(p);
        if (!rep.any_uniqueness()) continue;
        if (classify_zero_orbit(p).center_suspected()) continue;
        ++done;
        const CycleInventory inv = find_limit_cycles(p, -10, 10);
        collect(p.g(), p.f(), inv);
        worst = std::max(worst, static_cast<int>(inv.cycles.size()));
        if (inv.cycles.size() > 1) {
            std::snprintf(fmt_buf, sizeof fmt_buf,
                          "violation at (%g,%g,%g,%g,%g,%g): %zu nonzero cycles", p.a0, p.a1,
                          p.a2, p.b0, p.b1, p.b2, inv.cycles.size());
            detail = fmt_buf;
            return false;
        }
    }
    std::snprintf(fmt_buf, sizeof fmt_buf, "200 sets, max nonzero cycles %d (<=1)", worst);
    detail = fmt_buf;
    return true;
}

bool criterion5(std::string& detail) {
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const AbelParams p{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
        const CycleInventory inv = find_limit_cycles(p, -10, 10);
        collect(p.g(), p.f(), inv);
        worst = std::max(worst, inv.total_count());
        if (inv.total_count() > 3) {
            std::snprintf(fmt_buf, sizeof fmt_buf,
                          "violation at (%g,%g,%g,%g,%g,%g): %d cycles", p.a0, p.a1, p.a2,
                          p.b0, p.b1, p.b2, inv.total_count());
            detail = fmt_buf;
            return false;
        }
    }
    std::snprintf(fmt_buf, sizeof fmt_buf, "200 sets, max total count %d (<=3)", worst);
    detail = fmt_buf;
    return true;
}

// shared with criterion 8
WitnessResult g_witness;

bool criterion6(std::string& detail) {
    g_witness = find_three_cycle_witness(2026, +1.0);
    if (!g_witness.found) {
        detail = "witness search exhausted its budget";
        return false;
    }
    const CycleInventory& inv = g_witness.inventory;
    collect(g_witness.params.g(), g_witness.params.f(), inv);
    bool ok = inv.total_count() == 3 && inv.count_negative() == 2 && inv.count_positive() == 0;

    // independent confirmation on a denser, differently spaced grid
    FindCyclesOptions opt;
    opt.grid_per_side = 1024;
    opt.log_floor_ratio = 1e-7;
    const CycleInventory confirm =
        find_limit_cycles(g_witness.params, -10, 10, {}, opt);
    ok = ok && confirm.total_count() == 3 && confirm.count_negative() == 2;

    std::snprintf(fmt_buf, sizeof fmt_buf,
                  "params (p0=%g, q0=%g): cycles at x=%.6g, %.6g; dense rescan agrees",
                  g_witness.params.p0, g_witness.params.q0, inv.cycles[0].x_at_0,
                  inv.cycles[1].x_at_0);
    detail = fmt_buf;
    return ok;
}

bool criterion7(std::string& detail) {
    int combos = 0;
    for (double q1 : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        for (double q2 : {-1.0, -0.5, 0.5, 1.0}) {
            const DegenerateLineReport rep = verify_degenerate_line(1.0, q1, q2, 10.0);
            ++combos;
            if (!rep.no_nonzero_cycles) {
                std::snprintf(fmt_buf, sizeof fmt_buf, "cycles found at q1=%g q2=%g", q1, q2);
                detail = fmt_buf;
                return false;
            }
        }
    }
    std::snprintf(fmt_buf, sizeof fmt_buf, "%d (q1, q2) combinations, all clean", combos);
    detail = fmt_buf;
    return true;
}

bool criterion8(std::string& detail) {
    // continuation from the witness configuration up to the fold
    NormalForm nf = g_witness.found ? g_witness.params : make_nf(0.25, 1, 0.003125, 0, 1);
    const CycleInventory inv = find_limit_cycles(nf, -10, 10);
    if (inv.cycles.empty()) {
        detail = "no starting cycle";
        return false;
    }
    const Branch br = continue_in_q0(nf, inv.cycles.front(), true, nf.q0 + 0.5);
    if (br.termination != BranchTermination::fold || !br.fold) {
        detail = std::string("branch ended with ") + to_string(br.termination);
        return false;
    }
    const FoldEvent& ev = *br.fold;
    NormalForm nf_fold = nf;
    nf_fold.q0 = ev.q0;
    collect(nf_fold.g(), nf_fold.f(), [&] {
        CycleInventory tmp;
        tmp.cycles.push_back(ev.cycle);
        return tmp;
    }());

    const CycleGeometry geo = analyze_geometry(ev.cycle, nf_fold.g(), nf_fold.f());
    if (!geo.ok) {
        detail = "fold cycle geometry: " + geo.violation;
        return false;
    }
    const WProfile wp = compute_W_profile(ev.cycle, nf_fold.g(), geo);
    if (!wp.violation.empty()) {
        detail = "W profile: " + wp.violation;
        return false;
    }
    const VariationalResult var =
        integrate_variational(nf_fold.g(), nf_fold.f(), geo.x_star, geo.t_star);
    if (!var.complete()) {
        detail = "variational pass at t_star failed";
        return false;
    }
    const double rel = std::fabs(wp.Lpp_closed_form - var.Lpp) / std::fabs(var.Lpp);
    bool w_negative = true;
    for (const auto& row : wp.w_samples) w_negative = w_negative && row[1] < 0.0;

    std::snprintf(fmt_buf, sizeof fmt_buf,
                  "fold at q0=%.8g, |L'-1|=%.1e; L'' sign %+d vs %+d, rel dev %.2e (<0.05); "
                  "W<0 %s; W' changes %d (<=1)",
                  ev.q0, std::fabs(ev.cycle.multiplier - 1.0), wp.Lpp_closed_form > 0 ? 1 : -1,
                  var.Lpp > 0 ? 1 : -1, rel, w_negative ? "yes" : "NO",
                  wp.wprime_sign_changes);
    detail = fmt_buf;
    return (wp.Lpp_closed_form > 0) == (var.Lpp > 0) && rel < 0.05 && w_negative
           && wp.wprime_sign_changes <= 1;
}

bool criterion9(std::string& detail) {
    int checked = 0;
    for (const auto& item : g_collected) {
        const CycleGeometry geo = analyze_geometry(item.cycle, item.g, item.f);
        ++checked;
        const bool pass = geo.ok && geo.stationary_count == 2 && geo.sign_pattern_ok
                          && geo.t1 < geo.t_star_hi && geo.t_star_hi < geo.t2;
        if (!pass) {
            std::snprintf(fmt_buf, sizeof fmt_buf, "cycle at x=%.6g fails: %s",
                          item.cycle.x_at_0,
                          geo.violation.empty() ? "geometry" : geo.violation.c_str());
            detail = fmt_buf;
            return false;
        }
    }
    std::snprintf(fmt_buf, sizeof fmt_buf, "%d collected cycles, all pass the sign table",
                  checked);
    detail = fmt_buf;
    return true;
}

bool criterion10(std::string& detail) {
    std::mt19937 rng(10);
    std::uniform_real_distribution<double> up0(0.1, 0.35);
    std::uniform_real_distribution<double> uq0f(0.01, 0.3);
    std::uniform_real_distribution<double> uq1(-0.3, 0.3);
    std::uniform_real_distribution<double> uq2(0.5, 1.5);
    int branches = 0;
    while (branches < 20) {
        NormalForm nf;
        nf.p1 = 1.0;
        nf.p0 = up0(rng);
        nf.q0 = uq0f(rng) * nf.p0 * nf.p0;
        nf.q1 = uq1(rng);
        nf.q2 = uq2(rng) * (branches % 2 == 0 ? 1.0 : -1.0);
        if (!nf.nullcline_monotone()) continue;
        const CycleInventory inv = find_limit_cycles(nf, -10, 10);
        if (inv.cycles.empty()) continue;
        for (const auto& c : inv.cycles) {
            if (c.multiplicity != 1) continue;
            const bool up = branches % 3 != 0;
            const double limit = up ? nf.q0 + 0.2 : std::max(0.0, nf.q0 - 0.2);
            if (!up && limit >= nf.q0) continue;
            const Branch br = continue_in_q0(nf, c, up, limit);
            ++branches;
            if (!branch_motion_consistent(br)) {
                std::snprintf(fmt_buf, sizeof fmt_buf,
                              "montonicity violation on branch from x=%.5g (p0=%g q2=%g)",
                              c.x_at_0, nf.p0, nf.q2);
                detail = fmt_buf;
                return false;
            }
            if (branches >= 20) break;
        }
    }
    std::snprintf(fmt_buf, sizeof fmt_buf, "%d branches, motion always stability-consistent",
                  branches);
    detail = fmt_buf;
    return true;
}

} // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "closed-form oracle suite (riccati and cubic maps)", 10, criterion1},
        {2, "variational multiplier equals the along-orbit quadrature", 30, criterion2},
        {3, "zero-orbit table: closed forms and numeric fits", 60, criterion3},
        {4, "at most one nonzero cycle under any uniqueness inequality", 600, criterion4},
        {5, "at most three cycles on random parameters", 600, criterion5},
        {6, "sharpness witness with exactly three cycles", 300, criterion6},
        {7, "no nonzero cycles on the degenerate p0 = q0 = 0 grid", 120, criterion7},
        {8, "fold second derivative: closed form vs variational", 300, criterion8},
        {9, "cycle geometry holds for every collected cycle", 300, criterion9},
        {10, "branch motion follows the rotated-family direction", 300, criterion10},
    };

    int failures = 0;
    for (auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool pass = false;
        try {
            pass = c.body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_seconds) {
            pass = false;
            detail += " [over budget]";
        }
        std::printf("%s criterion %2d (%5.1fs): %s — %s\n", pass ? "PASS" : "FAIL", c.number,
                    secs, c.title.c_str(), detail.c_str());
        std::fflush(stdout);
        failures += !pass;
    }
    std::printf("%d/%zu criteria pass\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures;
}
