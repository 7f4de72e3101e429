// moments.hpp - quasifree n-point functions of the random-phase state.
//
// E[<a*(f1)...a*(fp) a(g1)...a(gq)>] is the pairing sum over perfect matchings
// of the symmetric block matrix
//     Q = [ A  C^T ]   A_ij = mu2 <conj f_i | rho f_j>
//         [ C  B   ]   B_ij = conj(mu2) <g_i | rho conj g_j>,  C_ij = <g_i | rho f_j>.
// The Monte Carlo oracle samples 2^{-(p+q)/2} chi(f1)...chi(fp) conj(chi(g1))...conj(chi(gq))
// directly and arbitrates the normalization.
#pragma once

#include "cohlim/ito_sampler.hpp"
#include "cohlim/mode_space.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace cohlim {

struct QMatrix {
    std::size_t p{0};
    std::size_t q{0};
    Eigen::MatrixXcd entries;  // (p+q) x (p+q)

    std::size_t size() const { return p + q; }
    double symmetry_residual() const;
};

QMatrix build_q(std::span<const TestFunction> fs, std::span<const TestFunction> gs, const ModeDensity& rho,
                cplx mu2);

inline constexpr std::size_t kMaxPairingOrder = 16;

/// 0 for odd p+q, else sum over perfect matchings of prod Q_{pair}.
/// Throws std::invalid_argument for p+q > 16.
cplx wick_moment(const QMatrix& Q);

/// Permanent by Ryser's formula with Gray-code updates.
cplx permanent(const Eigen::MatrixXcd& m);

/// sum_{sigma in S_p} prod_j <g_sigma(j) | rho f_j> (the mu_hat(2) = 0 case);
/// 0 when p != q. Throws std::invalid_argument for p > 10.
cplx permanent_moment(std::span<const TestFunction> fs, std::span<const TestFunction> gs, const ModeDensity& rho);

/// exp(t^T Q t): the generating function E[exp(sum z_j chi(f_j) + sum w_k conj chi(g_k))].
cplx generating_fn(const QMatrix& Q, std::span<const cplx> t);

struct McEstimate {
    cplx mean;
    double se_re{0.0};
    double se_im{0.0};
    std::size_t samples{0};

    double standard_error() const { return std::hypot(se_re, se_im); }
    /// |expected - mean| in units of the combined standard error.
    double z_score(cplx expected) const;
};

/// Brownian sample m uses stream m of seed. Requires at least 1000 samples.
McEstimate mc_oracle(std::span<const TestFunction> fs, std::span<const TestFunction> gs,
                     const CoefficientPair& coeffs, std::size_t samples, std::uint64_t seed, unsigned threads = 1);

/// <g | (rho + 1) f>: the normal-ordered value plus the commutator (2pi)^{-d} <g|f>.
cplx anti_normal_two_point(const TestFunction& f, const TestFunction& g, const ModeDensity& rho);

}  // namespace cohlim
