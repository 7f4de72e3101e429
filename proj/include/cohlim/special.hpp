// special.hpp - Bessel J0 by power series and by its circle-integral form.
#pragma once

#include "cohlim/numeric.hpp"

namespace cohlim {

/// J0(x) = sum_m (-1)^m (x^2/4)^m / (m!)^2, accumulated in long double.
/// Agrees with the circle integral to ~1e-12 for |x| <= 12.
double bessel_j0_series(double x);

/// \int_0^{2pi} dtheta/2pi exp(-i (a cos theta + b sin theta)) by the periodic
/// trapezoid rule with enough nodes to resolve the oscillation.
cplx bessel_circle_integral(double a, double b);

struct BesselCheck {
    cplx integral;
    double series;
    double residual() const { return std::abs(integral - series); }
};

/// Both routes at a^2 + b^2 = amplitude^2 (a = amplitude cos 0.3, b = amplitude sin 0.3).
BesselCheck bessel_check(double amplitude);

}  // namespace cohlim
