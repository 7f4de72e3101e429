// Shared fixtures for the unit and acceptance tests.
#pragma once

#include "cohlim/mode_space.hpp"
#include "cohlim/random.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace testing_support {

using namespace cohlim;

// A Gaussian with random center, width, amplitude and shift, kept well inside the box.
inline ClosedForm random_gaussian(int dim, double half_width, RngStream& rng) {
    ClosedForm c;
    c.kind = ClosedForm::Kind::gaussian;
    c.dim = dim;
    c.amplitude = std::polar(0.3 + rng.uniform(), kTwoPi * rng.uniform());
    for (int i = 0; i < dim; ++i) {
        c.center[i] = (rng.uniform() - 0.5) * 0.5 * half_width;
        c.shift[i] = 2.0 * (rng.uniform() - 0.5);
    }
    c.width = 0.4 + 0.6 * rng.uniform();
    return c;
}

inline TestFunction random_function(const MomentumGrid& grid, RngStream& rng) {
    return TestFunction::from_closed_form(grid, random_gaussian(grid.dim(), grid.half_width(), rng));
}

inline ModeDensity random_density(const MomentumGrid& grid, RngStream& rng) {
    const double peak = 0.2 + 2.0 * rng.uniform();
    const double width = 0.5 + rng.uniform();
    const double c0 = (rng.uniform() - 0.5) * 0.4 * grid.half_width();
    const int d = grid.dim();
    return ModeDensity::sample(grid, [=](const Point& k) {
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) r2 += (k[i] - c0) * (k[i] - c0);
        return peak * std::exp(-r2 / (2.0 * width * width));
    });
}

// Smallest eigenvalue of the Hermitian matrix
//   M_ab = conj(z_a) z_b exp((i/2) Im <f_a|f_b>) E(f_a - f_b)
// built with the position-space symplectic form (2pi)^{-d} Im <f_a|f_b>.
inline double positivity_floor(const std::vector<TestFunction>& fs, const std::vector<cplx>& z,
                               const std::function<cplx(const TestFunction&)>& E) {
    const auto n = static_cast<Eigen::Index>(fs.size());
    const double pos = position_norm_factor(fs[0].grid().dim());
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            const double symp = pos * inner(fs[a], fs[b]).imag();
            m(a, b) = std::conj(z[a]) * z[b] * std::polar(1.0, 0.5 * symp) * E(fs[a] - fs[b]);
        }
    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h).eigenvalues().minCoeff();
}

}  // namespace testing_support
