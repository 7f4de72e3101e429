// open_system.hpp - an N-level system coupled to the random-phase reservoir
// through an energy-conserving interaction G (x) Phi(g).
//
// The reduced density matrix is known in closed form:
//   rho_kl(t) = e^{-it(e_k - e_l)} e^{-it(g_k - g_l) Re chi(g)}
//               e^{(i/2)(g_k^2 - g_l^2) <g|(sin(eps t) - eps t)/eps|g>}
//               e^{-(g_k - g_l)^2 Gamma(t) / 2} rho_kl(0)
// with Gamma(t) = 2 \int |g_hat|^2 sin^2(eps t / 2) / eps^2 dk.
#pragma once

#include "cohlim/dynamics.hpp"
#include "cohlim/ito_sampler.hpp"
#include "cohlim/moments.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace cohlim {

// Cells with eps below this are dropped from the infrared-sensitive integrals.
inline constexpr double kInfraredCutoff = 1e-8;

struct SystemSpec {
    std::vector<double> energies;   // e_j
    std::vector<double> couplings;  // g_j, eigenvalues of G
    TestFunction form_factor;       // g_hat
    Dispersion dispersion;
    ModeDensity reservoir;          // rho of the coherent reservoir
    cplx mu2{0.0};                  // second phase moment of the reservoir
    Eigen::MatrixXcd initial;       // rho_S(0)

    std::size_t levels() const { return energies.size(); }
    /// Throws std::invalid_argument on inconsistent sizes, N < 2, or grids that disagree.
    void validate() const;
};

/// 2 \int |g_hat|^2 sin^2(eps t / 2) / eps^2 dk over cells with eps >= cutoff.
/// Rejects form factors that are nonzero on more than 2^d cells below the cutoff.
double gamma(double t, const TestFunction& g, const Dispersion& eps);

/// \int |g_hat|^2 (sin(eps t) - eps t) / eps dk, the coherent energy-shift phase integral.
double shift_integral(double t, const TestFunction& g, const Dispersion& eps);

struct ElementValue {
    cplx value;          // rho_kl(t), including the random factor when a sample was given
    cplx random_factor;  // e^{-it(g_k - g_l) Re chi(g)}, or 1 without a sample
    double envelope;     // |E[random_factor]| = e^{-t^2 (g_k - g_l)^2 sigma_mu(g)^2 / 2}
};

ElementValue reduced_element(const SystemSpec& sys, std::size_t k, std::size_t l, double t,
                             const BrownianSample* sample = nullptr);

struct ReducedElement {
    std::size_t k{0}, l{0};
    cplx initial;
    std::vector<double> times;
    std::vector<cplx> trajectory;
};
ReducedElement reduced_trajectory(const SystemSpec& sys, std::size_t k, std::size_t l,
                                  const std::vector<double>& times, const BrownianSample* sample = nullptr);

/// |E rho_kl(t)|: Gaussian factor from the random phase times the Gamma factor.
double averaged_offdiagonal(const SystemSpec& sys, std::size_t k, std::size_t l, double t);
/// e^{-(g_k - g_l)^2 Gamma(t) / 2} |rho_kl(0)| alone.
double gamma_envelope(const SystemSpec& sys, std::size_t k, std::size_t l, double t);

cplx averaged_element(const SystemSpec& sys, std::size_t k, std::size_t l, double t);
Eigen::MatrixXcd averaged_matrix(const SystemSpec& sys, double t);

/// Monte Carlo mean of e^{-i t (g_k - g_l) Re chi(g)} for each t; sample m uses stream m.
std::vector<McEstimate> random_factor_mc(const SystemSpec& sys, std::size_t k, std::size_t l,
                                         const std::vector<double>& times, std::size_t samples, std::uint64_t seed,
                                         unsigned threads = 1);

struct PlateauResult {
    double value{0.0};
    bool divergent{false};
    std::vector<double> cutoffs;       // inner cutoff of each partial sum
    std::vector<double> partial_sums;  // integral over eps >= cutoff
};

/// ||g_hat / eps||^2 on the grid, with partial sums over eps >= 10^{-m}.
PlateauResult gamma_plateau(const TestFunction& g, const Dispersion& eps);

/// Isotropic form factor |g_hat(k)| = c |k|^p exp(-|k|^2 / (2 cutoff^2)) with eps = |k|.
struct RadialFormFactor {
    int dim{3};
    double amplitude{1.0};   // c
    double exponent{-1.0};   // p, infrared exponent
    double cutoff{1.0};      // ultraviolet scale
    double sphere_area() const;  // |S^{d-1}|
    double density(double r) const;  // |g_hat(r)|^2
};

/// Gamma(t) by one-dimensional quadrature in |k|.
double radial_gamma(double t, const RadialFormFactor& ff);
/// ||g_hat / |k| ||^2 with decade partial sums; divergent when the increments stop shrinking.
PlateauResult radial_plateau(const RadialFormFactor& ff);
/// Late-time slope of Gamma when r^{d-1} |g_hat|^2 has a finite nonzero limit at 0:
/// (pi / 2) lim_{r->0} r^2 \int |g_hat|^2 dSigma. Throws otherwise.
double infrared_slope_prediction(const RadialFormFactor& ff);

struct ExponentialComparison {
    double rate{0.0};       // lambda of the fitted e^{-lambda t}
    double crossover{0.0};  // t* beyond which the envelope stays below the fit; NaN if none on the grid
    std::vector<double> times;
    std::vector<double> envelope;
};

/// Fits e^{-lambda t} to log|E rho_kl| over times <= fit_window and finds t*.
ExponentialComparison exponential_crossover(const SystemSpec& sys, std::size_t k, std::size_t l,
                                            const std::vector<double>& times, double fit_window);

}  // namespace cohlim
