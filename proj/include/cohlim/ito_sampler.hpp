// ito_sampler.hpp - the randomness omega of the random-phase state.
//
// Two independent Brownian fields are realized by i.i.d. N(0, dk) increments
// per grid cell (a Brownian-sheet reading of d independent motions); the Ito
// integral of a deterministic integrand is the simple-function sum over cells.
// chi_omega(f) = \int dB1 S1 f_hat + i \int dB2 S2 f_hat then has
// Re chi_omega(f) ~ N(0, sigma_mu(f)^2).
#pragma once

#include "cohlim/circle_measure.hpp"
#include "cohlim/functionals.hpp"
#include "cohlim/mode_space.hpp"
#include "cohlim/random.hpp"

#include <cstdint>
#include <vector>

namespace cohlim {

class BrownianSample {
public:
    /// Draws both fields from the stream (seed, stream).
    static BrownianSample draw(const MomentumGrid& grid, std::uint64_t seed, std::uint64_t stream);
    BrownianSample(MomentumGrid grid, std::vector<double> dB1, std::vector<double> dB2, std::uint64_t seed = 0,
                   std::uint64_t stream = 0);

    const MomentumGrid& grid() const { return grid_; }
    const std::vector<double>& dB1() const { return dB1_; }
    const std::vector<double>& dB2() const { return dB2_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    MomentumGrid grid_;
    std::vector<double> dB1_;
    std::vector<double> dB2_;
    std::uint64_t seed_;
    std::uint64_t stream_;
};

struct CoefficientPair {
    MomentumGrid grid;
    std::vector<cplx> s1;
    std::vector<double> s2;
    bool alternate_branch{false};  // Re mu_hat(2) = -1: S1 = i sqrt(rho), S2 = sqrt(rho)
};

inline constexpr double kAlternateBranchThreshold = 1e-9;

/// S1 = sqrt(rho / (1 + Re mu2)) (1 + mu2), S2 = sqrt(rho / (1 + Re mu2)) sqrt(1 - |mu2|^2);
/// for Re mu2 <= -1 + 1e-9, S1 = i sqrt(rho), S2 = sqrt(rho).
CoefficientPair build_coefficients(const ModeDensity& rho, cplx mu2);

/// sum_cells phi(k_j) dB(k_j).
cplx ito_integral(const TestFunction& phi, const std::vector<double>& dB);

cplx chi_omega(const TestFunction& f, const CoefficientPair& coeffs, const BrownianSample& sample);

/// E_Fock(f) exp(i Re chi_omega(f)).
cplx random_functional(const TestFunction& f, const CoefficientPair& coeffs, const BrownianSample& sample);

/// Precomputed integrands S1 f_hat and S2 f_hat for repeated evaluation of
/// chi_omega(f) across many samples.
class ChiKernel {
public:
    ChiKernel(const TestFunction& f, const CoefficientPair& coeffs);
    cplx operator()(const BrownianSample& sample) const;
    double fock_exponent() const { return fock_exponent_; }

private:
    MomentumGrid grid_;
    std::vector<cplx> w1_;
    std::vector<cplx> w2_;
    double fock_exponent_;
};

/// M draws of N^{-d/2} sum_j xi_j with xi_j = (2R)^{d/2} sqrt(2 rho_j) Re e^{-i theta_j} f_hat(k_j),
/// theta_j i.i.d. mu. Draw m uses stream m. Requires mu_hat(1) = 0.
std::vector<double> clt_sample(const TestFunction& f, const ModeDensity& rho, const PhaseMeasure& mu,
                               std::size_t draws, std::uint64_t seed, unsigned threads = 1);

struct LyapounovResult {
    bool degenerate{false};
    double ratio{0.0};
};

/// sum_j E|xi_j|^{2+delta} / s_N^{2+delta}, with the moments by circle quadrature.
LyapounovResult lyapounov_ratio(const TestFunction& f, const ModeDensity& rho, const PhaseMeasure& mu, double delta);

}  // namespace cohlim
