#include "cohlim/gns_reps.hpp"

#include "cohlim/special.hpp"

#include <stdexcept>

namespace cohlim {

SqueezeCoefficients build_alpha_beta(const ModeDensity& rho, cplx mu2) {
    const double m = std::abs(mu2);
    if (m > 1.0 + 1e-12) throw std::invalid_argument("build_alpha_beta: |mu_hat(2)| must be <= 1");
    SqueezeCoefficients c{rho.grid(), {}, {}};
    c.alpha.resize(rho.values().size());
    c.beta.resize(rho.values().size());
    const cplx phase = m < 1e-14 ? cplx{} : std::conj(mu2) / (2.0 * m);
    for (std::size_t j = 0; j < rho.values().size(); ++j) {
        const double r = rho.values()[j];
        const double s = std::min(1.0, m * std::sqrt(r / (1.0 + r)));
        const double up = std::sqrt(1.0 + s), down = std::sqrt(1.0 - s);
        c.alpha[j] = 0.5 * (up + down);
        c.beta[j] = phase * (up - down);
    }
    return c;
}

ModeDensity representation_density(const ModeDensity& rho) {
    return rho.scaled(std::pow(kTwoPi, rho.grid().dim()));
}

TestFunction apply_R(const TestFunction& f, const ModeDensity& rho, const SqueezeCoefficients& c) {
    require_same_grid(f.grid(), rho.grid(), "apply_R");
    require_same_grid(f.grid(), c.grid, "apply_R");
    std::vector<cplx> v(f.values().size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double r = rho.values()[j];
        const cplx fj = f.values()[j];
        v[j] = std::sqrt(1.0 + r) * c.alpha[j] * fj + std::sqrt(r) * c.beta[j] * std::conj(fj);
    }
    return TestFunction(f.grid(), std::move(v), {}, "R(" + f.label() + ")");
}

TestFunction apply_T(const TestFunction& f, const ModeDensity& rho, const SqueezeCoefficients& c) {
    require_same_grid(f.grid(), rho.grid(), "apply_T");
    require_same_grid(f.grid(), c.grid, "apply_T");
    std::vector<cplx> v(f.values().size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double r = rho.values()[j];
        const cplx fj = f.values()[j];
        v[j] = std::sqrt(1.0 + r) * std::conj(c.beta[j]) * fj + std::sqrt(r) * c.alpha[j] * std::conj(fj);
    }
    return TestFunction(f.grid(), std::move(v), {}, "T(" + f.label() + ")");
}

RepCheck rep_expectation_nmode(const TestFunction& f, const CoherentModeSet& modes, int circle_nodes) {
    if (circle_nodes < 8) throw std::invalid_argument("rep_expectation_nmode: too few circle nodes");
    RepCheck out;
    out.representation = fock_functional(f);
    out.reference = fock_functional(f);
    cplx prod = 1.0;
    double j0prod = 1.0;
    for (const auto& m : modes) {
        const cplx fk = f.at(m.k);
        const double amp = std::sqrt(2.0 * m.rho);
        CompensatedSum<cplx> acc;
        for (int i = 0; i < circle_nodes; ++i) {
            const double th = kTwoPi * i / circle_nodes;
            acc.add(std::polar(1.0, -amp * (std::cos(th) * fk.real() + std::sin(th) * fk.imag())));
        }
        prod *= acc.value() / static_cast<double>(circle_nodes);
        j0prod *= bessel_j0_series(amp * std::abs(fk));
    }
    out.representation.value *= prod;
    out.reference.value *= j0prod;
    return out;
}

RepCheck rep_expectation_averaged(const TestFunction& f, const ModeDensity& rho, cplx mu2) {
    const ModeDensity rep_rho = representation_density(rho);
    const SqueezeCoefficients c = build_alpha_beta(rep_rho, mu2);
    RepCheck out;
    const double e = fock_exponent(apply_R(f, rep_rho, c)) + fock_exponent(apply_T(f, rep_rho, c));
    out.representation.fock_exponent = e;
    out.representation.value = std::exp(e);
    out.reference = fock_functional(f);
    out.reference.sigma_sq = sigma_mu_sq(f, rho, mu2);
    out.reference.value = std::exp(out.reference.fock_exponent - 0.5 * out.reference.sigma_sq);
    return out;
}

RepCheck rep_expectation_random(const TestFunction& f, const CoefficientPair& coeffs, const BrownianSample& sample) {
    RepCheck out;
    out.representation = fock_functional(f);
    out.representation.phase = chi_omega(f, coeffs, sample).real();
    out.representation.value = std::exp(out.representation.fock_exponent) * std::polar(1.0, out.representation.phase);
    out.reference = fock_functional(f);
    out.reference.value = random_functional(f, coeffs, sample);
    return out;
}

}  // namespace cohlim
