#include "cohlim/special.hpp"

#include <stdexcept>

namespace cohlim {

double bessel_j0_series(double x) {
    const long double q = -0.25L * static_cast<long double>(x) * static_cast<long double>(x);
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int m = 1; m < 500; ++m) {
        term *= q / (static_cast<long double>(m) * static_cast<long double>(m));
        sum += term;
        if (std::abs(term) < 1e-22L * std::max(1.0L, std::abs(sum)) && static_cast<long double>(m) > std::abs(x)) break;
    }
    return static_cast<double>(sum);
}

cplx bessel_circle_integral(double a, double b) {
    const double amp = std::hypot(a, b);
    // Trapezoid error on a periodic entire integrand decays like J_M(amp).
    const int nodes = 64 + 2 * static_cast<int>(std::ceil(amp));
    CompensatedSum<cplx> acc;
    for (int i = 0; i < nodes; ++i) {
        const double th = kTwoPi * i / nodes;
        acc.add(std::polar(1.0, -(a * std::cos(th) + b * std::sin(th))));
    }
    return acc.value() / static_cast<double>(nodes);
}

BesselCheck bessel_check(double amplitude) {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw std::invalid_argument("bessel_check: amplitude must be finite and >= 0");
    const double a = amplitude * std::cos(0.3);
    const double b = amplitude * std::sin(0.3);
    return {bessel_circle_integral(a, b), bessel_j0_series(amplitude)};
}

}  // namespace cohlim
