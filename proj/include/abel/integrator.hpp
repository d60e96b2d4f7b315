#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "abel/rk.hpp"
#include "abel/trig.hpp"

namespace abel {

/// Right-hand side S(x,t) = g(t) x^3 + f(t) x^2 and its x-derivatives.
struct AbelField {
    TrigPoly g, f;

    double S(double x, double t) const {
        const double gv = g.eval(t), fv = f.eval(t);
        return (gv * x + fv) * x * x;
    }
    double Sx(double x, double t) const {
        return (3.0 * g.eval(t) * x + 2.0 * f.eval(t)) * x;
    }
    double Sxx(double x, double t) const { return 6.0 * g.eval(t) * x + 2.0 * f.eval(t); }
};

/// Dense numerical solution of the scalar Abel equation.
class Trajectory {
public:
    Trajectory(DenseSolution<1> sol) : sol_(std::move(sol)) {}

    IntegrationStatus status() const { return sol_.status; }
    bool complete() const { return sol_.status == IntegrationStatus::complete; }
    double t_escape() const { return sol_.t_escape; }
    double t_begin() const { return sol_.t_begin(); }
    double t_end() const { return sol_.t_end(); }

    double x(double t) const { return sol_.eval(t)[0]; }
    double x_begin() const { return sol_.empty() ? 0.0 : sol_.front()[0]; }
    double x_end() const { return sol_.empty() ? 0.0 : sol_.back()[0]; }

    const DenseSolution<1>& dense() const { return sol_; }

    /// Node samples (t, x) at the accepted step endpoints.
    std::vector<std::pair<double, double>> samples() const {
        std::vector<std::pair<double, double>> out;
        out.reserve(sol_.steps().size() + 1);
        for (const auto& s : sol_.steps()) out.emplace_back(s.t0, s.y0[0]);
        if (!sol_.empty()) out.emplace_back(sol_.steps().back().t1, sol_.steps().back().y1[0]);
        return out;
    }

private:
    DenseSolution<1> sol_;
};

inline Trajectory integrate(const TrigPoly& g, const TrigPoly& f, double x0, double t0,
                            double t1, const IntegratorConfig& cfg = {}) {
    if (!(t1 > t0)) throw std::invalid_argument("integrate: t1 must exceed t0");
    AbelField field{g, f};
    auto rhs = [&field](double t, const std::array<double, 1>& y, std::array<double, 1>& dy) {
        dy[0] = field.S(y[0], t);
    };
    return Trajectory(integrate_ode<1>(rhs, {x0}, t0, t1, cfg));
}

/// One-period value of the return map together with its first and second
/// derivatives, obtained from the variational system
///   v' = Sx v,  w' = Sx w + Sxx v^2,  v(t0) = 1, w(t0) = 0.
struct VariationalResult {
    double P = 0.0;    // x at t0 + 2pi
    double Lp = 0.0;   // L'(x0)
    double Lpp = 0.0;  // L''(x0)
    IntegrationStatus status = IntegrationStatus::step_failure;
    double t_escape = 0.0;

    bool complete() const { return status == IntegrationStatus::complete; }
};

/// Variational integration over one period, returning the dense augmented
/// solution.  Component order: (x, v, w).
inline DenseSolution<3> integrate_variational_dense(const TrigPoly& g, const TrigPoly& f,
                                                    double x0, double t0,
                                                    const IntegratorConfig& cfg = {}) {
    AbelField field{g, f};
    auto rhs = [&field](double t, const std::array<double, 3>& y, std::array<double, 3>& dy) {
        const double gv = field.g.eval(t), fv = field.f.eval(t);
        const double x = y[0];
        dy[0] = (gv * x + fv) * x * x;
        const double sx = (3.0 * gv * x + 2.0 * fv) * x;
        const double sxx = 6.0 * gv * x + 2.0 * fv;
        dy[1] = sx * y[1];
        dy[2] = sx * y[2] + sxx * y[1] * y[1];
    };
    return integrate_ode<3>(rhs, {x0, 1.0, 0.0}, t0, t0 + two_pi, cfg);
}

inline VariationalResult integrate_variational(const TrigPoly& g, const TrigPoly& f, double x0,
                                               double t0, const IntegratorConfig& cfg = {}) {
    const DenseSolution<3> sol = integrate_variational_dense(g, f, x0, t0, cfg);
    VariationalResult r;
    r.status = sol.status;
    r.t_escape = sol.t_escape;
    if (sol.status == IntegrationStatus::complete) {
        r.P = sol.back()[0];
        r.Lp = sol.back()[1];
        r.Lpp = sol.back()[2];
    }
    return r;
}

/// Quintic two-point Hermite reconstruction of x(t) inside one step.  The
/// stored step carries x and x' at both ends; x'' follows from the equation,
/// x'' = g'x^3 + f'x^2 + Sx(x,t) x'.  This lifts the along-orbit quadrature
/// cross-checks well past the cubic dense output without changing the
/// integrator itself.
class QuinticOrbitStep {
public:
    QuinticOrbitStep(const AbelField& field, const DenseStep<3>& st)
        : t0_(st.t0), h_(st.t1 - st.t0) {
        auto xdd = [&](double t, double x, double xd) {
            return field.g.deriv(t) * x * x * x + field.f.deriv(t) * x * x
                 + field.Sx(x, t) * xd;
        };
        const double y0 = st.y0[0], y1 = st.y1[0];
        const double c1 = h_ * st.f0[0], e1 = h_ * st.f1[0];
        const double c2 = h_ * h_ * xdd(st.t0, y0, st.f0[0]);
        const double e2 = h_ * h_ * xdd(st.t1, y1, st.f1[0]);
        const double r1 = (y1 - y0) - c1 - 0.5 * c2;
        const double r2 = e1 - c1 - c2;
        const double r3 = e2 - c2;
        a_[0] = y0;
        a_[1] = c1;
        a_[2] = 0.5 * c2;
        a_[3] = 10 * r1 - 4 * r2 + 0.5 * r3;
        a_[4] = -15 * r1 + 7 * r2 - r3;
        a_[5] = 6 * r1 - 3 * r2 + 0.5 * r3;
    }

    double x(double t) const {
        const double s = (t - t0_) / h_;
        return a_[0] + s * (a_[1] + s * (a_[2] + s * (a_[3] + s * (a_[4] + s * a_[5]))));
    }

private:
    double t0_, h_;
    std::array<double, 6> a_;
};

/// L' recomputed from the along-orbit quadrature exp(int Sx dt).  This is
/// the integral form of the first return-map derivative and serves as an
/// independent cross-check of the variational path.
inline double multiplier_via_quadrature(const TrigPoly& g, const TrigPoly& f,
                                        const DenseSolution<3>& sol) {
    AbelField field{g, f};
    double I = 0.0;
    for (const auto& st : sol.steps()) {
        const QuinticOrbitStep q(field, st);
        I += gl5_on_interval([&](double t) { return field.Sx(q.x(t), t); }, st.t0, st.t1);
    }
    return std::exp(I);
}

/// L'' recomputed from L' * int Sxx(x(t),t) exp(int_{t0}^t Sx) dt.
inline double second_derivative_via_quadrature(const TrigPoly& g, const TrigPoly& f,
                                               const DenseSolution<3>& sol) {
    AbelField field{g, f};
    double outer = 0.0;
    double cumSx = 0.0;  // int of Sx from t_begin to the current step start
    for (const auto& st : sol.steps()) {
        const QuinticOrbitStep q(field, st);
        auto Sx_at = [&](double t) { return field.Sx(q.x(t), t); };
        outer += gl5_on_interval(
            [&](double t) {
                const double inner = cumSx + gl5_on_interval(Sx_at, st.t0, t);
                return field.Sxx(q.x(t), t) * std::exp(inner);
            },
            st.t0, st.t1);
        cumSx += gl5_on_interval(Sx_at, st.t0, st.t1);
    }
    return std::exp(cumSx) * outer;
}

enum class ClosedFormCase { riccati, cubic };

struct ClosedFormMap {
    double P = 0.0, Lp = 0.0, Lpp = 0.0;
};

/// Exact one-period return map for the two quadrature-solvable cases.
///
/// riccati (g == 0, f = b0 + oscillation): P = x0 / (1 - 2 pi b0 x0).
/// cubic   (f == 0, g = a0 + oscillation): P = x0 / sqrt(1 - 4 pi a0 x0^2).
///
/// Oscillatory degree>=1 parts integrate to zero over the period and do not
/// enter the map.  Empty when the denominator is <= 0 (blow-up before one
/// period); with oscillatory parts the caller must keep x0 clear of interior
/// blow-up, which the period-end denominator cannot see.
inline std::optional<ClosedFormMap> closed_form_return_map(ClosedFormCase which,
                                                           double coefficient, double x0) {
    ClosedFormMap m;
    if (which == ClosedFormCase::riccati) {
        const double c = two_pi * coefficient;
        const double d = 1.0 - c * x0;
        if (d <= 0.0) return std::nullopt;
        m.P = x0 / d;
        m.Lp = 1.0 / (d * d);
        m.Lpp = 2.0 * c / (d * d * d);
    } else {
        const double c = 2.0 * two_pi * coefficient;
        const double d = 1.0 - c * x0 * x0;
        if (d <= 0.0) return std::nullopt;
        m.P = x0 / std::sqrt(d);
        m.Lp = 1.0 / (d * std::sqrt(d));
        m.Lpp = 3.0 * c * x0 / (d * d * std::sqrt(d));
    }
    return m;
}

} // namespace abel
