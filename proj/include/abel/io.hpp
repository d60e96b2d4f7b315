#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "abel/continuation.hpp"
#include "abel/model.hpp"
#include "abel/poincare.hpp"
#include "abel/structure.hpp"

namespace abel {

using ordered_json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline ordered_json to_json(const AbelParams& p) {
    return ordered_json{{"a0", p.a0}, {"a1", p.a1}, {"a2", p.a2},
                        {"b0", p.b0}, {"b1", p.b1}, {"b2", p.b2}};
}

inline AbelParams abel_params_from_json(const ordered_json& j) {
    return AbelParams{j.at("a0"), j.at("a1"), j.at("a2"),
                      j.at("b0"), j.at("b1"), j.at("b2")};
}

inline ordered_json to_json(const NormalForm& nf) {
    return ordered_json{{"p0", nf.p0},
                        {"p1", nf.p1},
                        {"q0", nf.q0},
                        {"q1", nf.q1},
                        {"q2", nf.q2},
                        {"theta", nf.theta},
                        {"sign_flip_s1", nf.flips.s1},
                        {"sign_flip_s2", nf.flips.s2},
                        {"degenerate", nf.degenerate}};
}

inline ordered_json to_json(const HypothesisReport& r) {
    const char* q2s = r.q2_sign == Sign::positive ? "+" : (r.q2_sign == Sign::negative ? "-" : "0");
    return ordered_json{{"uniqueness_a", r.uniqueness_a},
                        {"uniqueness_b", r.uniqueness_b},
                        {"uniqueness_c", r.uniqueness_c},
                        {"nullcline_monotone", r.nullcline_monotone},
                        {"c1", r.c1},
                        {"c2", to_string(r.c2)},
                        {"c2_resolution_warning", r.c2_resolution_warning},
                        {"q2_sign", q2s}};
}

inline ordered_json to_json(const ZeroOrbitClass& z) {
    ordered_json j;
    if (z.center_suspected()) {
        j["multiplicity"] = "center_suspected";
    } else {
        j["multiplicity"] = z.multiplicity;
        j["stability"] = to_string(z.stability);
    }
    if (z.L2) j["L2"] = *z.L2;
    if (z.L3) j["L3"] = *z.L3;
    if (z.L4) j["L4"] = *z.L4;
    return j;
}

inline ordered_json to_json(const LimitCycle& c) {
    return ordered_json{{"x_at_0", c.x_at_0},
                        {"x_star", c.x_star},
                        {"t_star", c.t_star},
                        {"multiplier", c.multiplier},
                        {"multiplicity", c.multiplicity},
                        {"stability", to_string(c.stability)},
                        {"residual", c.residual}};
}

inline ordered_json to_json(const CycleInventory& inv) {
    ordered_json cycles = ordered_json::array();
    for (const auto& c : inv.cycles) cycles.push_back(to_json(c));
    ordered_json escapes = ordered_json::array();
    for (const auto& [lo, hi] : inv.escape_intervals) escapes.push_back({lo, hi});
    ordered_json j{{"cycles", std::move(cycles)},
                   {"zero_orbit", to_json(inv.zero_orbit)},
                   {"window", {inv.window_lo, inv.window_hi}},
                   {"escape_intervals", std::move(escapes)},
                   {"total_count", inv.total_count()}};
    if (inv.window_unresolved) {
        j["window_unresolved"] = true;
        ordered_json pairs = ordered_json::array();
        for (const auto& [a, b] : inv.unresolved_pairs) pairs.push_back({a, b});
        j["unresolved_pairs"] = std::move(pairs);
    }
    return j;
}

inline ordered_json to_json(const CycleGeometry& g) {
    ordered_json j{{"ok", g.ok},
                   {"stationary_count", g.stationary_count},
                   {"t_star", g.t_star},
                   {"x_star", g.x_star},
                   {"t_star_hi", g.t_star_hi},
                   {"x_star_hi", g.x_star_hi},
                   {"t1", g.t1},
                   {"t2", g.t2},
                   {"sign_pattern_ok", g.sign_pattern_ok},
                   {"u_monotonicity", to_string(g.u_monotonicity)}};
    if (!g.ok) {
        j["violation"] = g.violation;
        if (g.violation_interval >= 0) {
            j["violation_interval"] = g.violation_interval;
            j["violation_t"] = g.violation_t;
        }
    }
    return j;
}

inline ordered_json to_json(const FoldEvent& ev) {
    return ordered_json{{"q0", ev.q0},
                        {"lpp_sign", ev.lpp_sign},
                        {"cycle", to_json(ev.cycle)}};
}

inline ordered_json to_json(const WitnessResult& w) {
    ordered_json j{{"found", w.found},
                   {"evaluations", w.evaluations},
                   {"best_count", w.best_count}};
    if (w.found) {
        j["params"] = to_json(w.params);
        j["inventory"] = to_json(w.inventory);
    } else {
        j["best_params"] = to_json(w.best_params);
    }
    return j;
}

/// Branch CSV: one row per accepted continuation point.
inline std::string branch_to_csv(const Branch& br, const std::string& preamble = {}) {
    std::string out = preamble;
    out += "q0,x_at_0,multiplier,stability\n";
    for (const auto& p : br.points) {
        out += format_double(p.q0);
        out += ',';
        out += format_double(p.cycle.x_at_0);
        out += ',';
        out += format_double(p.cycle.multiplier);
        out += ',';
        out += to_string(p.cycle.stability);
        out += '\n';
    }
    return out;
}

/// W-profile CSV for plotting: s, W, W'.
inline std::string wprofile_to_csv(const WProfile& wp, const std::string& preamble = {}) {
    std::string out = preamble;
    out += "s,W,Wprime\n";
    for (const auto& row : wp.w_samples) {
        out += format_double(row[0]);
        out += ',';
        out += format_double(row[1]);
        out += ',';
        out += format_double(row[2]);
        out += '\n';
    }
    return out;
}

} // namespace abel
