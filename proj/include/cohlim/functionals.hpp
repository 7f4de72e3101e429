// functionals.hpp - deterministic expectation functionals E(f) = omega(W(f)).
//
// Fock vacuum, fixed-phase N-mode states (finite and infinite volume), the
// phase-averaged continuous-mode state, and the divergence / rarefied-limit
// diagnostics that explain why random phases are needed.
#pragma once

#include "cohlim/circle_measure.hpp"
#include "cohlim/mode_space.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cohlim {

struct CoherentMode {
    Point k{};
    double rho{0.0};    // particles per unit volume in this mode
    double theta{0.0};  // phase, radians
};
using CoherentModeSet = std::vector<CoherentMode>;

/// Throws std::invalid_argument on rho < 0; wraps thetas into [0, 2pi).
CoherentModeSet validated(CoherentModeSet modes);

struct FunctionalValue {
    cplx value{1.0};
    double fock_exponent{0.0};  // log E_Fock(f)
    double sigma_sq{0.0};       // variance entering the averaged functionals
    double phase{0.0};          // coherent-mode phase for the N-mode functionals
};

/// -(2pi)^{-d} ||f_hat||^2 / 4.
double fock_exponent(const TestFunction& f);
FunctionalValue fock_functional(const TestFunction& f);

/// Re sum_j e^{-i theta_j} sqrt(2 rho_j) f_hat(k_j), with exact point evaluation
/// when f carries one.
double n_mode_phase(const TestFunction& f, const CoherentModeSet& modes);
FunctionalValue n_mode_functional(const TestFunction& f, const CoherentModeSet& modes);

struct FiniteVolumeResult {
    FunctionalValue value;
    std::vector<std::array<long, 3>> lattice_modes;  // n_j with k'_j = 2 pi n_j / L
    std::vector<cplx> coefficients;                  // f_hat_{k'_j} on the box
};

/// E^Lambda_N(f) for a box of side L: E_Fock on the box times
/// exp(i sqrt(2) Re sum conj(alpha_j(L)) f_hat_{k'_j}), alpha_j = L^{d/2} sqrt(rho_j) e^{i theta_j},
/// each k_j snapped to the nearest lattice momentum.
FiniteVolumeResult finite_volume_functional(const ClosedForm& f, double L, const CoherentModeSet& modes,
                                            BoxQuadrature quad = {});

/// \int rho (|f_hat|^2 + Re{mu2 f_hat^2}) dk by grid quadrature. Throws
/// std::logic_error if the result is below -1e-12.
double sigma_mu_sq(const TestFunction& f, const ModeDensity& rho, cplx mu2);

/// E_Fock(f) exp(-sigma_mu(f)^2 / 2). Rejects mu with mu_hat(1) != 0: the
/// continuous-mode limit does not exist there.
FunctionalValue phase_averaged_functional(const TestFunction& f, const ModeDensity& rho, const PhaseMeasure& mu);

/// Finite-N product of per-mode circle averages; valid for any mu.
FunctionalValue discrete_phase_average_functional(const TestFunction& f, const ModeDensity& rho,
                                                  const PhaseMeasure& mu);
/// One factor of that product.
cplx mode_phase_average(cplx amplitude, const PhaseMeasure& mu);

using PhaseFunction = std::function<double(const Point&)>;
using DensityFunction = std::function<double(const Point&)>;

struct DivergenceFit {
    bool conclusive{false};
    double slope{0.0};
    std::vector<std::size_t> cells;
    std::vector<double> magnitudes;  // |phase sum| per N
};

/// |(2R/N)^{d/2} sum_j e^{-i theta(k_j)} sqrt(2 rho(k_j)) f_hat(k_j)| for each N
/// and its log-log slope in N (about d/2). Inconclusive when every sum is
/// negligible against its triangle-inequality bound.
DivergenceFit divergence_diagnostic(const ClosedForm& f, const DensityFunction& rho, const PhaseFunction& theta,
                                     double half_width, const std::vector<std::size_t>& cells_per_axis);

struct RarefiedResult {
    FunctionalValue limit;
    std::vector<double> volumes;
    std::vector<cplx> finite_values;
    std::vector<double> errors;  // |E_L - E_limit|
    std::vector<std::size_t> occupied_modes;
};

/// d = 1 rarefied state: only every s-th mode of [a, b] is occupied with
/// s = sqrt(L) / (sigma pi (b - a)), so the occupied mesh is 1/(sigma sqrt(L)).
/// Limit: E_Fock(g) exp(i sqrt(2) sigma Re \int_a^b conj(alpha) g_hat dk).
RarefiedResult rarefied_functional(const TestFunction& g, const std::function<cplx(double)>& alpha, double a,
                                   double b, double sigma, const std::vector<double>& volumes);

}  // namespace cohlim
