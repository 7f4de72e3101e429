// circle_measure.hpp - probability measures on the circle and their Fourier moments.
//
// Only the Fourier moments mu_hat(n) = \int e^{-i n theta} dmu(theta) of a phase
// distribution enter the infinite-volume formulas; mu_hat(1) = 0 is required for
// the continuous-mode limit to exist and mu_hat(2) sets the variance.
#pragma once

#include "cohlim/numeric.hpp"
#include "cohlim/random.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace cohlim {

class PhaseMeasure {
public:
    enum class Kind { uniform, atoms, density };

    struct Atom {
        double angle;   // radians in [0, 2pi)
        double weight;  // nonnegative
    };

    static PhaseMeasure uniform();
    /// Angles are wrapped into [0, 2pi). Weights summing to within 1e-9 of 1 are
    /// renormalized; anything else is rejected with std::invalid_argument.
    static PhaseMeasure atoms(std::vector<Atom> atoms);
    /// Density p(theta) sampled at theta_i = 2 pi i / M, normalized so that the
    /// periodic trapezoid sum (2pi/M) sum_i p_i equals 1. Any positive scale is accepted.
    static PhaseMeasure density(std::vector<double> values);

    Kind kind() const { return kind_; }
    const std::vector<Atom>& atom_list() const { return atoms_; }
    const std::vector<double>& density_values() const { return density_; }

    /// Quadrature nodes and weights used for every circle average: 256 uniform
    /// nodes for the uniform measure, the atoms themselves, or the density grid.
    const std::vector<Atom>& nodes() const { return nodes_; }

    std::string describe() const;

private:
    PhaseMeasure() = default;
    void build_nodes();

    Kind kind_{Kind::uniform};
    std::vector<Atom> atoms_;
    std::vector<double> density_;
    std::vector<Atom> nodes_;
};

inline constexpr int kUniformCircleNodes = 256;

/// mu_hat(n) = \int e^{-i n theta} dmu. Exact for uniform and atoms; periodic
/// trapezoid for densities.
cplx fourier_moment(const PhaseMeasure& mu, int n);

/// One draw from mu. Densities are sampled piecewise-constant on their grid cells.
double sample_phase(const PhaseMeasure& mu, RngStream& rng);

/// |mu_hat(1)| <= tol.
bool admissible(const PhaseMeasure& mu, double tol = 1e-12);

/// \int h(theta) dmu(theta) by the measure's circle quadrature.
cplx circle_average(const PhaseMeasure& mu, const std::function<cplx(double)>& h);
double circle_average_real(const PhaseMeasure& mu, const std::function<double(double)>& h);

double wrap_angle(double theta);

}  // namespace cohlim
