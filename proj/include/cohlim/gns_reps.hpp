// gns_reps.hpp - representation-level checks for the three infinite-volume states.
//
// Nothing here materializes Fock-space vectors. Each representation is checked
// through <Psi, pi(W(f)) Psi>, which reduces to products of Fock functionals:
//   N-mode:    E_Fock(f) * prod_j (uniform circle average of the displacement phase)
//   averaged:  E_Fock(Rf) * E_Fock(Tf) with the real-linear maps R, T
//   random:    E_Fock(f) * exp(i Re chi_omega(f))
#pragma once

#include "cohlim/functionals.hpp"
#include "cohlim/ito_sampler.hpp"
#include "cohlim/mode_space.hpp"

#include <vector>

namespace cohlim {

struct SqueezeCoefficients {
    MomentumGrid grid;
    std::vector<double> alpha;
    std::vector<cplx> beta;
};

/// Pointwise, with s = |mu2| sqrt(rho / (1 + rho)):
///   alpha = (sqrt(1 + s) + sqrt(1 - s)) / 2
///   beta  = conj(mu2) / (2 |mu2|) * (sqrt(1 + s) - sqrt(1 - s)),   beta = 0 for |mu2| < 1e-14.
SqueezeCoefficients build_alpha_beta(const ModeDensity& rho, cplx mu2);

/// The density the R, T maps act with: (2pi)^d rho. The factor is what makes
/// ||Rf||^2 + ||Tf||^2 = ||f||^2 + 2 (2pi)^d sigma_mu(f)^2 hold under the
/// momentum-space norm used for E_Fock.
ModeDensity representation_density(const ModeDensity& rho);

/// sqrt(1 + rho) alpha f + sqrt(rho) beta conj(f). Real-linear only.
TestFunction apply_R(const TestFunction& f, const ModeDensity& rho, const SqueezeCoefficients& c);
/// sqrt(1 + rho) conj(beta) f + sqrt(rho) alpha conj(f).
TestFunction apply_T(const TestFunction& f, const ModeDensity& rho, const SqueezeCoefficients& c);

struct RepCheck {
    FunctionalValue representation;  // <Psi, pi(W(f)) Psi>
    FunctionalValue reference;       // the functional it should reproduce
    double residual() const { return std::abs(representation.value - reference.value); }
};

/// Cyclic vector Omega x 1 with uniform circle averages (circle_nodes per mode).
/// Reference: E_Fock(f) prod_j J0(sqrt(2 rho_j) |f_hat(k_j)|).
RepCheck rep_expectation_nmode(const TestFunction& f, const CoherentModeSet& modes, int circle_nodes = 256);

/// E_Fock(Rf) E_Fock(Tf) against phase_averaged_functional(f) for any mu with mu_hat(2) = mu2.
RepCheck rep_expectation_averaged(const TestFunction& f, const ModeDensity& rho, cplx mu2);

/// E_Fock(f) exp(i Re chi_omega(f)) against random_functional on the same sample.
RepCheck rep_expectation_random(const TestFunction& f, const CoefficientPair& coeffs, const BrownianSample& sample);

}  // namespace cohlim
