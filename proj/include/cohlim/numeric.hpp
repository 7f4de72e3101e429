// numeric.hpp - shared scalar types, constants and compensated reductions.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>

namespace cohlim {

using cplx = std::complex<double>;

// Momentum or position point; components beyond the grid dimension are zero.
using Point = std::array<double, 3>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

inline double norm_of(const Point& k, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += k[i] * k[i];
    return std::sqrt(s);
}

inline double dot(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}

// (2*pi)^{-d}: converts momentum-space L2 norms to position-space ones.
inline double position_norm_factor(int dim) { return std::pow(kTwoPi, -dim); }

// Neumaier-compensated accumulator. Long grid reductions go through this so
// the result does not depend on summation order beyond ~1 ulp of the total.
template <typename T>
class CompensatedSum {
public:
    void add(T x) {
        T t = sum_ + x;
        comp_ += correction(sum_, x, t);
        sum_ = t;
    }
    T value() const { return sum_ + comp_; }

private:
    static double correction(double s, double x, double t) {
        return std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    }
    static cplx correction(cplx s, cplx x, cplx t) {
        return {correction(s.real(), x.real(), t.real()), correction(s.imag(), x.imag(), t.imag())};
    }
    T sum_{};
    T comp_{};
};

template <typename T>
T compensated_sum(std::span<const T> xs) {
    CompensatedSum<T> acc;
    for (const T& x : xs) acc.add(x);
    return acc.value();
}

}  // namespace cohlim
