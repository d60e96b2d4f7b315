#pragma once

// Numerical toolkit for the classical Abel equation
//   dx/dt = g(t) x^3 + f(t) x^2
// with degree-1 trigonometric coefficients: return maps and their
// derivatives, limit-cycle detection and classification, cycle geometry
// diagnostics, and rotated-family continuation in the q0 parameter.

#include "abel/version.hpp"

#include "abel/trig.hpp"
#include "abel/model.hpp"
#include "abel/rk.hpp"
#include "abel/integrator.hpp"
#include "abel/poincare.hpp"
#include "abel/structure.hpp"
#include "abel/continuation.hpp"
