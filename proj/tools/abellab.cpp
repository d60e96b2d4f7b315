// abellab: command-line front end for Abel-equation limit-cycle analysis.
//
// Subcommands: analyze, check, sweep, continue, witness, oracle.
// Exit codes: 0 success, 1 usage error, 2 geometry violation, 3 oracle failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "abel/abel.hpp"
#include "abel/io.hpp"

using namespace abel;
using ordered_json = nlohmann::ordered_json;

namespace {

struct SharedOpts {
    std::vector<double> params;
    std::string params_json;
    std::string window = "-10:10";
    int grid = 512;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    std::string out;
    std::string format = "json";
    unsigned seed = 0;
};

void add_shared(CLI::App* cmd, SharedOpts& o) {
    auto* p = cmd->add_option("--params", o.params,
                              "a0,a1,a2,b0,b1,b2 (comma separated)")
                  ->delimiter(',')
                  ->expected(6);
    auto* pj = cmd->add_option("--params-json", o.params_json,
                               "parameters as a JSON object {\"a0\":..,..}");
    p->excludes(pj);
    cmd->add_option("--window", o.window, "scan window lo:hi")->capture_default_str();
    cmd->add_option("--grid", o.grid, "grid points per window side")
        ->check(CLI::Range(64, 1 << 20))
        ->capture_default_str();
    cmd->add_option("--rel-tol", o.rel_tol, "integrator relative tolerance")
        ->capture_default_str();
    cmd->add_option("--abs-tol", o.abs_tol, "integrator absolute tolerance")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "output path (stdout when omitted)");
    cmd->add_option("--format", o.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "seed for randomized procedures")
        ->capture_default_str();
}

AbelParams resolve_params(const SharedOpts& o) {
    if (!o.params_json.empty()) {
        const auto j = ordered_json::parse(o.params_json);
        return abel_params_from_json(j);
    }
    if (o.params.size() != 6)
        throw CLI::ValidationError("--params", "expected 6 comma-separated reals");
    for (double v : o.params)
        if (!std::isfinite(v)) throw CLI::ValidationError("--params", "non-finite value");
    return AbelParams{o.params[0], o.params[1], o.params[2],
                      o.params[3], o.params[4], o.params[5]};
}

std::pair<double, double> parse_window(const std::string& w) {
    const auto colon = w.find(':', 1);  // allow a leading minus sign
    if (colon == std::string::npos)
        throw CLI::ValidationError("--window", "expected lo:hi");
    try {
        const double lo = std::stod(w.substr(0, colon));
        const double hi = std::stod(w.substr(colon + 1));
        if (!(lo < hi)) throw CLI::ValidationError("--window", "need lo < hi");
        return {lo, hi};
    } catch (const std::invalid_argument&) {
        throw CLI::ValidationError("--window", "expected lo:hi");
    }
}

IntegratorConfig make_cfg(const SharedOpts& o) {
    IntegratorConfig cfg;
    cfg.rel_tol = o.rel_tol;
    cfg.abs_tol = o.abs_tol;
    return cfg;
}

ordered_json config_json(const std::string& command, const SharedOpts& o) {
    return ordered_json{{"command", command},
                        {"window", o.window},
                        {"grid", o.grid},
                        {"rel_tol", o.rel_tol},
                        {"abs_tol", o.abs_tol},
                        {"format", o.format},
                        {"seed", o.seed}};
}

std::string config_preamble(const std::string& command, const SharedOpts& o) {
    std::string s;
    s += "# version=" + std::string(version) + "\n";
    s += "# command=" + command + "\n";
    s += "# window=" + o.window + "\n";
    s += "# grid=" + std::to_string(o.grid) + "\n";
    s += "# rel_tol=" + format_double(o.rel_tol) + "\n";
    s += "# abs_tol=" + format_double(o.abs_tol) + "\n";
    s += "# seed=" + std::to_string(o.seed) + "\n";
    return s;
}

void write_output(const SharedOpts& o, const std::string& text) {
    if (o.out.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw CLI::ValidationError("--out", "cannot open " + o.out);
    f << text;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

int cmd_check(const SharedOpts& o) {
    const AbelParams p = resolve_params(o);
    const NormalForm nf = reduce_to_normal_form(p);
    ordered_json rep{{"version", version},
                     {"config", config_json("check", o)},
                     {"params", to_json(p)},
                     {"normal_form", to_json(nf)},
                     {"hypotheses", to_json(classify_hypotheses(p))},
                     {"zero_orbit", to_json(classify_zero_orbit(nf))}};
    write_output(o, dump(rep));
    return 0;
}

int cmd_analyze(const SharedOpts& o, const std::string& w_profile_path, int w_cycle_index) {
    const AbelParams p = resolve_params(o);
    const auto [lo, hi] = parse_window(o.window);
    const NormalForm nf = reduce_to_normal_form(p);
    const HypothesisReport hyp = classify_hypotheses(p);
    const IntegratorConfig cfg = make_cfg(o);
    FindCyclesOptions fopt;
    fopt.grid_per_side = o.grid;

    const CycleInventory inv = find_limit_cycles(nf, lo, hi, cfg, fopt);

    if (!w_profile_path.empty()) {
        if (w_cycle_index < 0 || w_cycle_index >= static_cast<int>(inv.cycles.size()))
            throw CLI::ValidationError("--w-cycle-index",
                                       "inventory has " + std::to_string(inv.cycles.size())
                                           + " cycles");
        const LimitCycle& c = inv.cycles[w_cycle_index];
        const CycleGeometry geo = analyze_geometry(c, nf.g(), nf.f());
        if (!geo.ok)
            throw CLI::ValidationError("--w-profile", "cycle geometry: " + geo.violation);
        const WProfile wp = compute_W_profile(c, nf.g(), geo);
        std::ofstream f(w_profile_path, std::ios::binary);
        if (!f) throw CLI::ValidationError("--w-profile", "cannot open " + w_profile_path);
        f << wprofile_to_csv(wp, config_preamble("analyze", o));
    }

    ordered_json report{{"version", version},
                        {"config", config_json("analyze", o)},
                        {"params", to_json(p)},
                        {"normal_form", to_json(nf)},
                        {"hypotheses", to_json(hyp)},
                        {"inventory", to_json(inv)}};

    // cycles mapped back through the recorded reduction
    ordered_json original = ordered_json::array();
    for (const auto& c : inv.cycles) {
        const double x0 = nf.map_initial_value_back([&](double t) { return c.orbit.x(t); });
        original.push_back({{"x_at_0", x0},
                            {"multiplier", nf.map_multiplier_back(c.multiplier)}});
    }
    report["cycles_original_frame"] = std::move(original);

    bool geometry_violation = false;
    const bool structural = hyp.c1 && hyp.c2 != Monotonicity::indefinite;
    if (structural) {
        ordered_json diags = ordered_json::array();
        for (const auto& c : inv.cycles) {
            const CycleGeometry geo = analyze_geometry(c, nf.g(), nf.f());
            ordered_json d{{"x_at_0", c.x_at_0}, {"geometry", to_json(geo)}};
            if (!geo.ok) {
                geometry_violation = true;
            } else {
                const WProfile wp = compute_W_profile(c, nf.g(), geo);
                ordered_json w{{"h_period_residual", wp.h_period_residual},
                               {"wprime_sign_changes", wp.wprime_sign_changes},
                               {"branch_monotone_ok", wp.branch_monotone_ok}};
                if (std::fabs(c.multiplier - 1.0) < 1e-3)
                    w["Lpp_closed_form"] = wp.Lpp_closed_form;
                d["w_profile"] = std::move(w);
            }
            diags.push_back(std::move(d));
        }
        report["diagnostics"] = std::move(diags);
    }
    write_output(o, dump(report));
    return geometry_violation ? 2 : 0;
}

int cmd_sweep(const SharedOpts& o, const std::string& vary) {
    const auto eq = vary.find('=');
    if (eq == std::string::npos)
        throw CLI::ValidationError("--vary", "expected name=lo:hi:step");
    const std::string name = vary.substr(0, eq);
    double lo = 0, hi = 0, step = 0;
    if (std::sscanf(vary.c_str() + eq + 1, "%lf:%lf:%lf", &lo, &hi, &step) != 3
        || !(step > 0))
        throw CLI::ValidationError("--vary", "expected name=lo:hi:step with step > 0");

    AbelParams base = resolve_params(o);
    double* field = nullptr;
    if (name == "a0") field = &base.a0;
    else if (name == "a1") field = &base.a1;
    else if (name == "a2") field = &base.a2;
    else if (name == "b0") field = &base.b0;
    else if (name == "b1") field = &base.b1;
    else if (name == "b2") field = &base.b2;
    else throw CLI::ValidationError("--vary", "unknown parameter " + name);

    const auto [wlo, whi] = parse_window(o.window);
    const IntegratorConfig cfg = make_cfg(o);
    FindCyclesOptions fopt;
    fopt.grid_per_side = o.grid;

    std::string csv = config_preamble("sweep", o);
    csv += "# vary=" + vary + "\n";
    csv += "value,cycle_count_pos,cycle_count_neg,zero_orbit_class,min_mult_dist,status\n";

    for (long k = 0;; ++k) {
        const double v = lo + k * step;
        if (v > hi + 1e-12 * std::max(1.0, std::fabs(hi))) break;
        *field = v;
        csv += format_double(v);
        try {
            const NormalForm nf = reduce_to_normal_form(base);
            const CycleInventory inv = find_limit_cycles(nf, wlo, whi, cfg, fopt);
            double dist = std::numeric_limits<double>::quiet_NaN();
            for (const auto& c : inv.cycles) {
                const double d = std::fabs(c.multiplier - 1.0);
                if (std::isnan(dist) || d < dist) dist = d;
            }
            const std::string zclass = inv.zero_orbit.center_suspected()
                ? std::string("center_suspected")
                : std::to_string(inv.zero_orbit.multiplicity) + ":"
                      + to_string(inv.zero_orbit.stability);
            csv += "," + std::to_string(inv.count_positive());
            csv += "," + std::to_string(inv.count_negative());
            csv += "," + zclass;
            csv += "," + format_double(dist);
            csv += ",ok\n";
        } catch (const std::exception& e) {
            std::string msg = e.what();
            for (auto& ch : msg)
                if (ch == ',' || ch == '\n') ch = ';';
            csv += ",,,,," + msg + "\n";
        }
    }
    write_output(o, csv);
    return 0;
}

int cmd_continue(const SharedOpts& o, const std::string& dir, double q0_to, int cycle_index) {
    const AbelParams p = resolve_params(o);
    const auto [lo, hi] = parse_window(o.window);
    const NormalForm nf = reduce_to_normal_form(p);
    const IntegratorConfig cfg = make_cfg(o);
    FindCyclesOptions fopt;
    fopt.grid_per_side = o.grid;

    const CycleInventory inv = find_limit_cycles(nf, lo, hi, cfg, fopt);
    if (cycle_index < 0 || cycle_index >= static_cast<int>(inv.cycles.size()))
        throw CLI::ValidationError(
            "--cycle-index", "inventory has " + std::to_string(inv.cycles.size()) + " cycles");

    const bool up = dir == "up";
    const double limit = std::isnan(q0_to) ? (up ? nf.q0 + 0.5 : nf.q0 - 0.5) : q0_to;
    const Branch br = continue_in_q0(nf, inv.cycles[cycle_index], up, limit, cfg);

    if (o.format == "csv") {
        std::string preamble = config_preamble("continue", o);
        preamble += "# direction=" + dir + "\n";
        preamble += "# termination=" + std::string(to_string(br.termination)) + "\n";
        if (br.fold) preamble += "# fold_q0=" + format_double(br.fold->q0) + "\n";
        write_output(o, branch_to_csv(br, preamble));
    } else {
        ordered_json points = ordered_json::array();
        for (const auto& bp : br.points) {
            ordered_json pt = to_json(bp.cycle);
            pt["q0"] = bp.q0;
            points.push_back(std::move(pt));
        }
        ordered_json j{{"version", version},
                       {"config", config_json("continue", o)},
                       {"direction", dir},
                       {"termination", to_string(br.termination)},
                       {"points", std::move(points)}};
        if (br.fold) j["fold"] = to_json(*br.fold);
        write_output(o, dump(j));
    }
    return 0;
}

int cmd_witness(const SharedOpts& o, double q2_sign, int budget) {
    const auto [lo, hi] = parse_window(o.window);
    const double window = std::max(std::fabs(lo), std::fabs(hi));
    const WitnessResult res =
        find_three_cycle_witness(o.seed, q2_sign, {}, window, budget, make_cfg(o));
    ordered_json j{{"version", version}, {"config", config_json("witness", o)}};
    j.update(to_json(res));
    write_output(o, dump(j));
    return 0;
}

// ---------------------------------------------------------------------------
// oracle self-tests

struct OracleRow {
    std::string name;
    double err = 0;
    double threshold = 0;
    bool pass() const { return err < threshold; }
};

int cmd_oracle(const SharedOpts& o, double escape_bound) {
    const IntegratorConfig cfg = make_cfg(o);
    std::vector<OracleRow> rows;

    const TrigPoly zero = TrigPoly::constant(0);
    {
        const double b0 = 1.0 / two_pi;
        const TrigPoly f = TrigPoly::constant(b0);
        double eP = 0, eLp = 0, eLpp = 0;
        for (int i = 0; i < 50; ++i) {
            const double x0 = -2.0 + 2.9 * i / 49.0;
            const auto m = closed_form_return_map(ClosedFormCase::riccati, b0, x0);
            const VariationalResult r = integrate_variational(zero, f, x0, 0.0, cfg);
            if (!m || !r.complete()) continue;
            eP = std::max(eP, std::fabs(r.P - m->P) / std::max(1e-300, std::fabs(m->P)));
            eLp = std::max(eLp, std::fabs(r.Lp - m->Lp) / std::fabs(m->Lp));
            eLpp = std::max(eLpp, std::fabs(r.Lpp - m->Lpp) / std::fabs(m->Lpp));
        }
        rows.push_back({"riccati_P", eP, 1e-8});
        rows.push_back({"riccati_Lp", eLp, 1e-6});
        rows.push_back({"riccati_Lpp", eLpp, 1e-6});
    }
    {
        const double a0 = 1.0 / (2 * two_pi);
        const TrigPoly g = TrigPoly::constant(a0);
        double eP = 0, eLp = 0, eLpp = 0;
        for (int i = 0; i < 50; ++i) {
            const double x0 = -0.9 + 1.8 * i / 49.0;
            const auto m = closed_form_return_map(ClosedFormCase::cubic, a0, x0);
            const VariationalResult r = integrate_variational(g, zero, x0, 0.0, cfg);
            if (!m || !r.complete()) continue;
            eP = std::max(eP, std::fabs(r.P - m->P) / std::max(1e-300, std::fabs(m->P)));
            eLp = std::max(eLp, std::fabs(r.Lp - m->Lp) / std::fabs(m->Lp));
            if (std::fabs(m->Lpp) > 1e-12)
                eLpp = std::max(eLpp, std::fabs(r.Lpp - m->Lpp) / std::fabs(m->Lpp));
        }
        rows.push_back({"cubic_P", eP, 1e-8});
        rows.push_back({"cubic_Lp", eLp, 1e-6});
        rows.push_back({"cubic_Lpp", eLpp, 1e-6});
    }
    {
        // variational first/second derivatives against the along-orbit
        // quadrature forms, on seeded random coefficients
        std::mt19937 rng(o.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double eLp = 0, eLpp = 0;
        int done = 0;
        while (done < 100) {
            const TrigPoly g = TrigPoly::linear(u(rng), u(rng), u(rng));
            const TrigPoly f = TrigPoly::linear(u(rng), u(rng), u(rng));
            const double x0 = 0.5 * u(rng);
            const DenseSolution<3> sol = integrate_variational_dense(g, f, x0, 0.0, cfg);
            if (sol.status != IntegrationStatus::complete) continue;
            ++done;
            const double Lp = sol.back()[1];
            eLp = std::max(eLp, std::fabs(multiplier_via_quadrature(g, f, sol) - Lp)
                                    / std::fabs(Lp));
            const double Lpp = sol.back()[2];
            if (std::fabs(Lpp) > 1e-6)
                eLpp = std::max(eLpp,
                                std::fabs(second_derivative_via_quadrature(g, f, sol) - Lpp)
                                    / std::fabs(Lpp));
        }
        rows.push_back({"multiplier_quadrature", eLp, 1e-8});
        rows.push_back({"second_derivative_quadrature", eLpp, 1e-6});
    }
    {
        // finite-time blow-up: x' = x^3 from x0 = 1 escapes near t = 1/2
        IntegratorConfig ecfg = cfg;
        ecfg.escape_bound = escape_bound;
        const Trajectory traj =
            integrate(TrigPoly::constant(1), zero, 1.0, 0.0, two_pi, ecfg);
        double err = 1.0;
        if (traj.status() == IntegrationStatus::escaped) {
            const double t_exact = 0.5 * (1.0 - 1.0 / (escape_bound * escape_bound));
            err = std::fabs(traj.t_escape() - t_exact);
        }
        rows.push_back({"blowup_escape_time", err, cfg.max_step});
    }

    std::string table = config_preamble("oracle", o);
    table += "# escape_bound=" + format_double(escape_bound) + "\n";
    bool all_pass = true;
    for (const auto& r : rows) {
        char line[160];
        std::snprintf(line, sizeof line, "%-32s %12.3e %12.3e  %s\n", r.name.c_str(), r.err,
                      r.threshold, r.pass() ? "PASS" : "FAIL");
        table += line;
        all_pass = all_pass && r.pass();
    }
    table += all_pass ? "oracle: all rows pass\n" : "oracle: FAILURES present\n";
    write_output(o, table);
    return all_pass ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Limit-cycle analysis of dx/dt = g(t)x^3 + f(t)x^2 with "
                 "degree-1 trigonometric coefficients"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    SharedOpts o;
    std::string vary, dir = "up", w_profile_path;
    int w_cycle_index = 0;
    double q0_to = std::numeric_limits<double>::quiet_NaN();
    int cycle_index = 0;
    double q2_sign = 1.0;
    int budget = 60;
    double escape_bound = 1e6;

    CLI::App* analyze = app.add_subcommand("analyze", "hypotheses, cycles and diagnostics");
    add_shared(analyze, o);
    analyze->add_option("--w-profile", w_profile_path,
                        "also write the W-profile CSV of one cycle to this path");
    analyze->add_option("--w-cycle-index", w_cycle_index, "cycle for --w-profile")
        ->capture_default_str();
    CLI::App* check = app.add_subcommand("check", "hypothesis report only");
    add_shared(check, o);
    CLI::App* sweep = app.add_subcommand("sweep", "one-parameter sweep to CSV");
    add_shared(sweep, o);
    sweep->add_option("--vary", vary, "name=lo:hi:step over a0..b2")->required();
    CLI::App* cont = app.add_subcommand("continue", "rotated-family continuation in q0");
    add_shared(cont, o);
    cont->add_option("--dir", dir, "up|down")
        ->check(CLI::IsMember({"up", "down"}))
        ->capture_default_str();
    cont->add_option("--q0-to", q0_to, "target q0 (default: 0.5 beyond the start)");
    cont->add_option("--cycle-index", cycle_index, "index into the initial inventory")
        ->capture_default_str();
    CLI::App* witness = app.add_subcommand("witness", "search for a three-cycle witness");
    add_shared(witness, o);
    witness->add_option("--q2", q2_sign, "sign of q2 (+1 or -1)")
        ->check(CLI::IsMember({1.0, -1.0}))
        ->capture_default_str();
    witness->add_option("--budget", budget, "max candidate evaluations")
        ->capture_default_str();
    CLI::App* oracle = app.add_subcommand("oracle", "closed-form oracle self-tests");
    add_shared(oracle, o);
    oracle->add_option("--escape-bound", escape_bound, "escape bound for the blow-up row")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(o, w_profile_path, w_cycle_index);
        if (check->parsed()) return cmd_check(o);
        if (sweep->parsed()) return cmd_sweep(o, vary);
        if (cont->parsed()) return cmd_continue(o, dir, q0_to, cycle_index);
        if (witness->parsed()) return cmd_witness(o, q2_sign, budget);
        if (oracle->parsed()) return cmd_oracle(o, escape_bound);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
