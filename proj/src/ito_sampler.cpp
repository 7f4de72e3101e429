#include "cohlim/ito_sampler.hpp"

#include "cohlim/parallel.hpp"

#include <stdexcept>

namespace cohlim {

BrownianSample::BrownianSample(MomentumGrid grid, std::vector<double> dB1, std::vector<double> dB2,
                               std::uint64_t seed, std::uint64_t stream)
    : grid_(std::move(grid)), dB1_(std::move(dB1)), dB2_(std::move(dB2)), seed_(seed), stream_(stream) {
    if (dB1_.size() != grid_.size() || dB2_.size() != grid_.size())
        throw std::invalid_argument("BrownianSample: increment count does not match grid");
}

BrownianSample BrownianSample::draw(const MomentumGrid& grid, std::uint64_t seed, std::uint64_t stream) {
    RngStream rng(seed, stream);
    const double sd = std::sqrt(grid.cell_volume());
    std::vector<double> b1(grid.size()), b2(grid.size());
    for (double& x : b1) x = sd * rng.normal();
    for (double& x : b2) x = sd * rng.normal();
    return BrownianSample(grid, std::move(b1), std::move(b2), seed, stream);
}

CoefficientPair build_coefficients(const ModeDensity& rho, cplx mu2) {
    if (std::abs(mu2) > 1.0 + 1e-12) throw std::invalid_argument("build_coefficients: |mu_hat(2)| must be <= 1");
    CoefficientPair c{rho.grid(), {}, {}, false};
    const std::size_t n = rho.values().size();
    c.s1.resize(n);
    c.s2.resize(n);
    c.alternate_branch = mu2.real() <= -1.0 + kAlternateBranchThreshold;
    const double den = 1.0 + mu2.real();
    const double s2_factor = std::sqrt(std::max(0.0, 1.0 - std::norm(mu2)));
    for (std::size_t j = 0; j < n; ++j) {
        const double r = rho.values()[j];
        if (c.alternate_branch) {
            c.s1[j] = kI * std::sqrt(r);
            c.s2[j] = std::sqrt(r);
        } else {
            const double scale = std::sqrt(r / den);
            c.s1[j] = scale * (1.0 + mu2);
            c.s2[j] = scale * s2_factor;
        }
    }
    return c;
}

cplx ito_integral(const TestFunction& phi, const std::vector<double>& dB) {
    if (dB.size() != phi.values().size()) throw std::invalid_argument("ito_integral: grid mismatch");
    CompensatedSum<cplx> acc;
    for (std::size_t j = 0; j < dB.size(); ++j) acc.add(phi.values()[j] * dB[j]);
    return acc.value();
}

ChiKernel::ChiKernel(const TestFunction& f, const CoefficientPair& coeffs)
    : grid_(f.grid()), fock_exponent_(cohlim::fock_exponent(f)) {
    require_same_grid(f.grid(), coeffs.grid, "chi_omega");
    const auto& fv = f.values();
    w1_.resize(fv.size());
    w2_.resize(fv.size());
    for (std::size_t j = 0; j < fv.size(); ++j) {
        w1_[j] = coeffs.s1[j] * fv[j];
        w2_[j] = kI * coeffs.s2[j] * fv[j];
    }
}

cplx ChiKernel::operator()(const BrownianSample& sample) const {
    require_same_grid(grid_, sample.grid(), "chi_omega");
    const auto& b1 = sample.dB1();
    const auto& b2 = sample.dB2();
    CompensatedSum<cplx> acc;
    for (std::size_t j = 0; j < w1_.size(); ++j) acc.add(w1_[j] * b1[j] + w2_[j] * b2[j]);
    return acc.value();
}

cplx chi_omega(const TestFunction& f, const CoefficientPair& coeffs, const BrownianSample& sample) {
    return ChiKernel(f, coeffs)(sample);
}

cplx random_functional(const TestFunction& f, const CoefficientPair& coeffs, const BrownianSample& sample) {
    const ChiKernel kernel(f, coeffs);
    return std::exp(kernel.fock_exponent()) * std::polar(1.0, kernel(sample).real());
}

std::vector<double> clt_sample(const TestFunction& f, const ModeDensity& rho, const PhaseMeasure& mu,
                               std::size_t draws, std::uint64_t seed, unsigned threads) {
    require_same_grid(f.grid(), rho.grid(), "clt_sample");
    if (!admissible(mu, 1e-12)) throw std::invalid_argument("clt_sample: mu_hat_1 nonzero");
    const MomentumGrid& grid = f.grid();
    // N^{-d/2} (2R)^{d/2} = dk^{1/2}
    const double scale = std::sqrt(grid.cell_volume());
    std::vector<cplx> amp(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) amp[j] = scale * std::sqrt(2.0 * rho.values()[j]) * f.values()[j];
    std::vector<double> out(draws);
    parallel_for(draws, threads, [&](std::size_t m) {
        RngStream rng(seed, m);
        CompensatedSum<double> acc;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double th = sample_phase(mu, rng);
            acc.add((std::polar(1.0, -th) * amp[j]).real());
        }
        out[m] = acc.value();
    });
    return out;
}

LyapounovResult lyapounov_ratio(const TestFunction& f, const ModeDensity& rho, const PhaseMeasure& mu, double delta) {
    require_same_grid(f.grid(), rho.grid(), "lyapounov_ratio");
    if (!(delta > 0.0)) throw std::invalid_argument("lyapounov_ratio: delta must be positive");
    const MomentumGrid& grid = f.grid();
    const double pref = std::pow(2.0 * grid.half_width(), 0.5 * grid.dim());
    CompensatedSum<double> moments, variance;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const cplx a = pref * std::sqrt(2.0 * rho.values()[j]) * f.values()[j];
        if (a == cplx{}) continue;
        moments.add(circle_average_real(mu, [&](double th) {
            return std::pow(std::abs((std::polar(1.0, -th) * a).real()), 2.0 + delta);
        }));
        variance.add(circle_average_real(mu, [&](double th) {
            const double x = (std::polar(1.0, -th) * a).real();
            return x * x;
        }));
    }
    const double s2 = variance.value();
    if (!(s2 > 0.0)) return {true, 0.0};
    return {false, moments.value() / std::pow(s2, 1.0 + 0.5 * delta)};
}

}  // namespace cohlim
