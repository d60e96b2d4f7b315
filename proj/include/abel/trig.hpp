#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace abel {

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Real trigonometric polynomial  c0 + sum_k (ck cos kt + sk sin kt).
///
/// Degree-1 instances carry the coefficient functions g, f of the Abel
/// equation dx/dt = g(t) x^3 + f(t) x^2; higher degrees are accepted
/// wherever only evaluation and zero counting are needed.
class TrigPoly {
public:
    TrigPoly() = default;

    TrigPoly(double constant, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
        : c0_(constant), cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs)) {
        if (cos_.size() != sin_.size())
            throw std::invalid_argument("TrigPoly: cos/sin coefficient lengths differ");
        if (!std::isfinite(c0_)) throw std::invalid_argument("TrigPoly: non-finite coefficient");
        for (std::size_t k = 0; k < cos_.size(); ++k)
            if (!std::isfinite(cos_[k]) || !std::isfinite(sin_[k]))
                throw std::invalid_argument("TrigPoly: non-finite coefficient");
    }

    static TrigPoly constant(double c) { return TrigPoly(c, {}, {}); }

    /// c + s*sin(t) + c1*cos(t), the only shape the Abel model itself uses.
    static TrigPoly linear(double c, double s, double c1) { return TrigPoly(c, {c1}, {s}); }

    double constant_term() const { return c0_; }
    const std::vector<double>& cos_coeffs() const { return cos_; }
    const std::vector<double>& sin_coeffs() const { return sin_; }
    std::size_t degree() const { return cos_.size(); }

    bool is_zero() const {
        if (c0_ != 0.0) return false;
        for (std::size_t k = 0; k < cos_.size(); ++k)
            if (cos_[k] != 0.0 || sin_[k] != 0.0) return false;
        return true;
    }

    double eval(double t) const {
        double v = c0_;
        for (std::size_t k = 0; k < cos_.size(); ++k) {
            const double kt = static_cast<double>(k + 1) * t;
            v += cos_[k] * std::cos(kt) + sin_[k] * std::sin(kt);
        }
        return v;
    }

    double deriv(double t) const {
        double v = 0.0;
        for (std::size_t k = 0; k < cos_.size(); ++k) {
            const double n = static_cast<double>(k + 1);
            v += n * (sin_[k] * std::cos(n * t) - cos_[k] * std::sin(n * t));
        }
        return v;
    }

    /// Antiderivative with primitive(0) = 0; the constant term integrates to c0*t.
    double primitive(double t) const {
        double v = c0_ * t;
        for (std::size_t k = 0; k < cos_.size(); ++k) {
            const double n = static_cast<double>(k + 1);
            v += (cos_[k] * std::sin(n * t) + sin_[k] * (1.0 - std::cos(n * t))) / n;
        }
        return v;
    }

    double operator()(double t) const { return eval(t); }

private:
    double c0_ = 0.0;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

} // namespace abel
