#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace abel {

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Plain bisection on a sign-change bracket [a, b].  f(a) and f(b) may be
/// passed in when already known.
template <class F>
RootResult bisect(F&& f, double a, double b, double fa, double fb,
                  double xtol = 1e-12, int maxit = 200) {
    RootResult r;
    if (fa == 0.0) return {a, 0.0, 0, true};
    if (fb == 0.0) return {b, 0.0, 0, true};
    if (fa * fb > 0.0) return {0.5 * (a + b), fa, 0, false};
    for (int i = 0; i < maxit; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        r.iterations = i + 1;
        if (fm == 0.0 || 0.5 * (b - a) < xtol) {
            r.x = m;
            r.fx = fm;
            r.converged = true;
            return r;
        }
        if (fa * fm < 0.0) {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    r.x = 0.5 * (a + b);
    r.fx = f(r.x);
    r.converged = false;
    return r;
}

template <class F>
RootResult bisect(F&& f, double a, double b, double xtol = 1e-12, int maxit = 200) {
    return bisect(f, a, b, f(a), f(b), xtol, maxit);
}

/// Newton iteration kept inside a sign-change bracket; any step that leaves
/// the bracket (or fails to shrink the residual) is replaced by bisection.
/// `fdf` evaluates (f, f') at once.  Convergence is on the residual:
/// |f| < restol(x).
template <class FDF, class ResTol>
RootResult newton_bisect(FDF&& fdf, double a, double b, double fa, double fb,
                         ResTol&& restol, int maxit = 100) {
    if (fa == 0.0) return {a, 0.0, 0, true};
    if (fb == 0.0) return {b, 0.0, 0, true};
    if (fa * fb > 0.0) return {0.5 * (a + b), fa, 0, false};

    double x = (std::fabs(fa) < std::fabs(fb)) ? a : b;
    for (int i = 0; i < maxit; ++i) {
        auto [fx, dfx] = fdf(x);
        if (std::fabs(fx) < restol(x)) return {x, fx, i, true};
        // keep the bracket current
        if (fa * fx < 0.0) {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
        double xn = x - (dfx != 0.0 ? fx / dfx : 0.0);
        if (dfx == 0.0 || xn <= std::fmin(a, b) || xn >= std::fmax(a, b)) xn = 0.5 * (a + b);
        if (xn == x) xn = 0.5 * (a + b);
        x = xn;
    }
    auto [fx, dfx] = fdf(x);
    (void)dfx;
    return {x, fx, maxit, std::fabs(fx) < restol(x)};
}

} // namespace abel
