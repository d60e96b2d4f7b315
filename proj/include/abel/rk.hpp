#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace abel {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.19634954084936207;  // pi/16
    double escape_bound = 1e6;
    long max_steps = 1000000;

    void validate() const {
        if (!(rel_tol > 0) || !(abs_tol > 0) || !(max_step > 0) || !(escape_bound > 0)
            || max_steps < 1)
            throw std::invalid_argument("IntegratorConfig: tolerances, max_step, "
                                        "escape_bound and max_steps must be positive");
    }
};

enum class IntegrationStatus { complete, escaped, step_failure };

inline const char* to_string(IntegrationStatus s) {
    switch (s) {
        case IntegrationStatus::complete: return "complete";
        case IntegrationStatus::escaped: return "escaped";
        default: return "step_failure";
    }
}

namespace dopri5 {
// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - bhat, for the embedded 4th-order error estimate
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
} // namespace dopri5

/// One accepted step with endpoint values and derivatives; evaluation
/// between the endpoints is cubic Hermite.
template <std::size_t N>
struct DenseStep {
    double t0 = 0, t1 = 0;
    std::array<double, N> y0{}, f0{}, y1{}, f1{};

    std::array<double, N> eval(double t) const {
        const double h = t1 - t0;
        const double s = (t - t0) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        std::array<double, N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
        return y;
    }
};

/// Piecewise dense solution of an N-dimensional initial value problem.
template <std::size_t N>
class DenseSolution {
public:
    IntegrationStatus status = IntegrationStatus::step_failure;
    double t_escape = 0.0;  // valid when status == escaped

    double t_begin() const { return t_begin_; }
    double t_end() const { return t_end_; }
    const std::vector<DenseStep<N>>& steps() const { return steps_; }
    bool empty() const { return steps_.empty(); }

    const std::array<double, N>& front() const { return steps_.front().y0; }
    const std::array<double, N>& back() const { return steps_.back().y1; }

    std::array<double, N> eval(double t) const {
        const DenseStep<N>& s = locate(t);
        if (t <= s.t0) return s.y0;
        if (t >= s.t1) return s.y1;
        return s.eval(t);
    }

    double eval_component(double t, std::size_t i) const { return eval(t)[i]; }

    std::array<double, N> deriv(double t) const {
        const DenseStep<N>& s = locate(t);
        const double h = s.t1 - s.t0;
        const double u = std::clamp((t - s.t0) / h, 0.0, 1.0);
        const double u2 = u * u;
        const double d00 = (6 * u2 - 6 * u) / h, d10 = 3 * u2 - 4 * u + 1;
        const double d01 = (6 * u - 6 * u2) / h, d11 = 3 * u2 - 2 * u;
        std::array<double, N> dy;
        for (std::size_t i = 0; i < N; ++i)
            dy[i] = d00 * s.y0[i] + d10 * s.f0[i] + d01 * s.y1[i] + d11 * s.f1[i];
        return dy;
    }

    void set_range(double a, double b) { t_begin_ = a; t_end_ = b; }
    void push(const DenseStep<N>& s) { steps_.push_back(s); }

private:
    const DenseStep<N>& locate(double t) const {
        // steps are contiguous and increasing in t
        std::size_t lo = 0, hi = steps_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (t < steps_[mid].t1) hi = mid;
            else lo = mid + 1;
        }
        return steps_[lo];
    }

    double t_begin_ = 0, t_end_ = 0;
    std::vector<DenseStep<N>> steps_;
};

/// Adaptive DOPRI5 with PI step-size control.  Escape is declared when the
/// first state component crosses cfg.escape_bound in magnitude; the crossing
/// time is then refined on the dense output of the offending step.
template <std::size_t N, class RHS>
DenseSolution<N> integrate_ode(RHS&& rhs, std::array<double, N> y, double t0, double t1,
                               const IntegratorConfig& cfg) {
    using std::fabs;
    cfg.validate();
    DenseSolution<N> sol;
    sol.set_range(t0, t1);

    auto finite = [](const std::array<double, N>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };

    std::array<double, N> f0;
    rhs(t0, y, f0);
    if (!finite(f0)) {
        sol.status = IntegrationStatus::step_failure;
        return sol;
    }

    double t = t0;
    // crude but safe starting step; the controller converges within a few steps
    double h = std::min(cfg.max_step, (t1 - t0) / 16.0);
    {
        double fn = 0;
        for (std::size_t i = 0; i < N; ++i)
            fn = std::max(fn, fabs(f0[i]) / (cfg.abs_tol + cfg.rel_tol * fabs(y[i])));
        if (fn > 0) h = std::min(h, std::pow(1.0 / fn, 0.2));
    }

    double errold = 1e-4;
    long nsteps = 0;
    const double hmin_floor = 16.0 * 2.220446049250313e-16;

    while (t < t1) {
        if (++nsteps > cfg.max_steps) {
            sol.status = IntegrationStatus::step_failure;
            return sol;
        }
        bool last = false;
        if (t + h >= t1) {
            h = t1 - t;
            last = true;
        }

        using namespace dopri5;
        std::array<double, N> k2, k3, k4, k5, k6, k7, yt, y1v;
        auto stage = [&](std::array<double, N>& out, double c, auto... terms) {
            for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (... + terms[i]);
            rhs(t + c * h, yt, out);
        };
        auto mul = [](double a, const std::array<double, N>& v) {
            std::array<double, N> r;
            for (std::size_t i = 0; i < N; ++i) r[i] = a * v[i];
            return r;
        };

        stage(k2, c2, mul(a21, f0));
        stage(k3, c3, mul(a31, f0), mul(a32, k2));
        stage(k4, c4, mul(a41, f0), mul(a42, k2), mul(a43, k3));
        stage(k5, c5, mul(a51, f0), mul(a52, k2), mul(a53, k3), mul(a54, k4));
        stage(k6, 1.0, mul(a61, f0), mul(a62, k2), mul(a63, k3), mul(a64, k4), mul(a65, k5));
        for (std::size_t i = 0; i < N; ++i)
            y1v[i] = y[i] + h * (b1 * f0[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(t + h, y1v, k7);  // FSAL stage

        double err = 0.0;
        bool ok = finite(y1v) && finite(k7);
        if (ok) {
            for (std::size_t i = 0; i < N; ++i) {
                const double ei = h * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i]
                                       + e6 * k6[i] + e7 * k7[i]);
                const double sc = cfg.abs_tol + cfg.rel_tol * std::max(fabs(y[i]), fabs(y1v[i]));
                err += (ei / sc) * (ei / sc);
            }
            err = std::sqrt(err / N);
            ok = std::isfinite(err);
        }

        if (!ok || err > 1.0) {
            // rejected
            double fac = ok ? std::min(5.0, std::pow(err, 0.17) / 0.9) : 5.0;
            h /= fac;
            if (h < hmin_floor * std::max(1.0, fabs(t))) {
                if (fabs(y[0]) >= 0.01 * cfg.escape_bound) {
                    // blow-up outruns the step controller before the bound check
                    sol.status = IntegrationStatus::escaped;
                    sol.t_escape = t;
                    sol.set_range(t0, t);
                    return sol;
                }
                sol.status = IntegrationStatus::step_failure;
                return sol;
            }
            continue;
        }

        DenseStep<N> step{t, t + h, y, f0, y1v, k7};
        if (last) step.t1 = t1;

        if (fabs(y1v[0]) >= cfg.escape_bound) {
            // refine the crossing time on the dense step
            double lo = step.t0, hi = step.t1;
            for (int it = 0; it < 80 && hi - lo > hmin_floor * std::max(1.0, fabs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (fabs(step.eval(mid)[0]) >= cfg.escape_bound) hi = mid;
                else lo = mid;
            }
            sol.push(step);
            sol.status = IntegrationStatus::escaped;
            sol.t_escape = hi;
            sol.set_range(t0, step.t1);
            return sol;
        }

        sol.push(step);
        t = step.t1;
        y = y1v;
        f0 = k7;

        const double fac11 = std::pow(err, 0.17);
        double fac = fac11 / std::pow(errold, 0.04);
        fac = std::max(0.1, std::min(5.0, fac / 0.9));
        h = std::min(h / fac, cfg.max_step);
        errold = std::max(err, 1e-4);
    }

    sol.status = IntegrationStatus::complete;
    return sol;
}

// 5-point Gauss-Legendre nodes/weights on [-1, 1]
namespace gl5 {
constexpr std::array<double, 5> nodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                         0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> weights = {0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};
} // namespace gl5

/// Integral of fn(t) over one dense step by 5-point Gauss-Legendre.
template <class Fn>
double gl5_on_interval(Fn&& fn, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int j = 0; j < 5; ++j) s += gl5::weights[j] * fn(mid + half * gl5::nodes[j]);
    return s * half;
}

/// Integral of fn(t, y(t)) along a dense solution, step by step.
template <std::size_t N, class Fn>
double integrate_along(const DenseSolution<N>& sol, Fn&& fn) {
    double total = 0.0;
    for (const auto& st : sol.steps())
        total += gl5_on_interval([&](double t) { return fn(t, st.eval(t)); }, st.t0, st.t1);
    return total;
}

} // namespace abel
