#include "cohlim/functionals.hpp"
#include "cohlim/stats.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <stdexcept>

namespace cohlim {

CoherentModeSet validated(CoherentModeSet modes) {
    for (auto& m : modes) {
        if (!(m.rho >= 0.0) || !std::isfinite(m.rho)) throw std::invalid_argument("coherent mode: rho must be >= 0");
        if (!std::isfinite(m.theta)) throw std::invalid_argument("coherent mode: theta must be finite");
        m.theta = wrap_angle(m.theta);
    }
    return modes;
}

double fock_exponent(const TestFunction& f) {
    return -0.25 * position_norm_factor(f.grid().dim()) * norm_sq_momentum(f);
}

FunctionalValue fock_functional(const TestFunction& f) {
    FunctionalValue v;
    v.fock_exponent = fock_exponent(f);
    v.value = std::exp(v.fock_exponent);
    return v;
}

double n_mode_phase(const TestFunction& f, const CoherentModeSet& modes) {
    CompensatedSum<double> acc;
    for (const auto& m : modes) {
        if (m.rho < 0.0) throw std::invalid_argument("n_mode_phase: rho must be >= 0");
        acc.add((std::polar(1.0, -m.theta) * std::sqrt(2.0 * m.rho) * f.at(m.k)).real());
    }
    return acc.value();
}

FunctionalValue n_mode_functional(const TestFunction& f, const CoherentModeSet& modes) {
    FunctionalValue v = fock_functional(f);
    v.phase = n_mode_phase(f, modes);
    v.value = std::exp(v.fock_exponent) * std::polar(1.0, v.phase);
    return v;
}

FiniteVolumeResult finite_volume_functional(const ClosedForm& f, double L, const CoherentModeSet& modes,
                                            BoxQuadrature quad) {
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("finite_volume_functional: L must be positive");
    const int d = f.dim;
    FiniteVolumeResult r;
    for (const auto& m : modes) {
        std::array<long, 3> n{};
        for (int i = 0; i < d; ++i) n[i] = std::lround(m.k[i] * L / kTwoPi);
        r.lattice_modes.push_back(n);
    }
    const PositionFunction pos = [&f](const Point& x) { return f.position(x); };
    r.coefficients = finite_volume_coefficients(pos, d, L, r.lattice_modes, quad);
    CompensatedSum<cplx> acc;
    for (std::size_t j = 0; j < modes.size(); ++j) {
        if (modes[j].rho < 0.0) throw std::invalid_argument("finite_volume_functional: rho must be >= 0");
        const cplx alpha = std::pow(L, 0.5 * d) * std::sqrt(modes[j].rho) * std::polar(1.0, modes[j].theta);
        acc.add(std::conj(alpha) * r.coefficients[j]);
    }
    r.value.fock_exponent = -0.25 * box_norm_sq(pos, d, L, quad);
    r.value.phase = std::numbers::sqrt2 * acc.value().real();
    r.value.value = std::exp(r.value.fock_exponent) * std::polar(1.0, r.value.phase);
    return r;
}

double sigma_mu_sq(const TestFunction& f, const ModeDensity& rho, cplx mu2) {
    require_same_grid(f.grid(), rho.grid(), "sigma_mu_sq");
    if (std::abs(mu2) > 1.0 + 1e-12) throw std::invalid_argument("sigma_mu_sq: |mu_hat(2)| must be <= 1");
    CompensatedSum<double> acc;
    const auto& fv = f.values();
    const auto& rv = rho.values();
    for (std::size_t j = 0; j < fv.size(); ++j) acc.add(rv[j] * (std::norm(fv[j]) + (mu2 * fv[j] * fv[j]).real()));
    const double s = f.grid().cell_volume() * acc.value();
    if (s < -1e-12) throw std::logic_error("sigma_mu_sq: negative variance");
    return std::max(s, 0.0);
}

FunctionalValue phase_averaged_functional(const TestFunction& f, const ModeDensity& rho, const PhaseMeasure& mu) {
    if (!admissible(mu, 1e-12)) {
        throw std::invalid_argument(
            "phase_averaged_functional: mu_hat(1) nonzero; the continuous-mode limit does not exist "
            "(the phase sum diverges like N^{d/2})");
    }
    FunctionalValue v = fock_functional(f);
    v.sigma_sq = sigma_mu_sq(f, rho, fourier_moment(mu, 2));
    v.value = std::exp(v.fock_exponent - 0.5 * v.sigma_sq);
    return v;
}

cplx mode_phase_average(cplx amplitude, const PhaseMeasure& mu) {
    return circle_average(mu, [amplitude](double th) {
        return std::polar(1.0, (std::polar(1.0, -th) * amplitude).real());
    });
}

FunctionalValue discrete_phase_average_functional(const TestFunction& f, const ModeDensity& rho,
                                                  const PhaseMeasure& mu) {
    require_same_grid(f.grid(), rho.grid(), "discrete_phase_average_functional");
    FunctionalValue v = fock_functional(f);
    const double dk = f.grid().cell_volume();
    // Accumulate log|factor| and the argument separately; products of 10^6
    // factors near 1 lose nothing this way.
    CompensatedSum<double> log_mod;
    CompensatedSum<double> arg;
    bool zero = false;
    for (std::size_t j = 0; j < f.values().size(); ++j) {
        const double r = rho.values()[j];
        const cplx fj = f.values()[j];
        if (r == 0.0 || fj == cplx{}) continue;
        const cplx factor = mode_phase_average(std::sqrt(2.0 * r * dk) * fj, mu);
        if (factor == cplx{}) {
            zero = true;
            break;
        }
        log_mod.add(std::log(std::abs(factor)));
        arg.add(std::arg(factor));
    }
    v.sigma_sq = -2.0 * log_mod.value();
    v.value = zero ? cplx{} : std::exp(v.fock_exponent + log_mod.value()) * std::polar(1.0, arg.value());
    return v;
}

DivergenceFit divergence_diagnostic(const ClosedForm& f, const DensityFunction& rho, const PhaseFunction& theta,
                                     double half_width, const std::vector<std::size_t>& cells_per_axis) {
    if (cells_per_axis.size() < 4) throw std::invalid_argument("divergence_diagnostic: need at least 4 values of N");
    DivergenceFit fit;
    bool all_negligible = true;
    for (std::size_t n : cells_per_axis) {
        const MomentumGrid grid(f.dim, half_width, n);
        CompensatedSum<cplx> acc;
        CompensatedSum<double> bound;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const Point k = grid.node(j);
            const double r = rho(k);
            if (r < 0.0) throw std::invalid_argument("divergence_diagnostic: rho must be >= 0");
            const cplx term = std::polar(1.0, -theta(k)) * std::sqrt(2.0 * r) * f.momentum(k);
            acc.add(term);
            bound.add(std::abs(term));
        }
        const double scale = std::pow(grid.spacing(), 0.5 * f.dim);
        const double mag = scale * std::abs(acc.value());
        if (mag > 1e-12 * scale * bound.value() && mag > 0.0) all_negligible = false;
        fit.cells.push_back(n);
        fit.magnitudes.push_back(mag);
    }
    if (all_negligible) return fit;
    for (double m : fit.magnitudes)
        if (!(m > 0.0)) return fit;
    std::vector<double> ns(fit.cells.begin(), fit.cells.end());
    fit.slope = loglog_slope(ns, fit.magnitudes);
    fit.conclusive = true;
    return fit;
}

RarefiedResult rarefied_functional(const TestFunction& g, const std::function<cplx(double)>& alpha, double a,
                                   double b, double sigma, const std::vector<double>& volumes) {
    if (g.grid().dim() != 1) throw std::invalid_argument("rarefied_functional: d must be 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("rarefied_functional: sigma must be positive");
    if (!(b > a)) throw std::invalid_argument("rarefied_functional: need a < b");
    const auto integrand = [&](double k) { return std::conj(alpha(k)) * g.at({k, 0.0, 0.0}); };
    using boost::math::quadrature::gauss_kronrod;
    const double re = gauss_kronrod<double, 61>::integrate([&](double k) { return integrand(k).real(); }, a, b, 15, 1e-14);
    const double im = gauss_kronrod<double, 61>::integrate([&](double k) { return integrand(k).imag(); }, a, b, 15, 1e-14);
    const cplx integral{re, im};

    RarefiedResult r;
    r.limit = fock_functional(g);
    r.limit.phase = std::numbers::sqrt2 * sigma * integral.real();
    r.limit.value = std::exp(r.limit.fock_exponent) * std::polar(1.0, r.limit.phase);
    for (double L : volumes) {
        if (!(L > 0.0)) throw std::invalid_argument("rarefied_functional: L must be positive");
        // Occupied modes k_l = a + l / (sigma sqrt(L)), l = 1 .. sigma (b - a) sqrt(L).
        const double mesh = 1.0 / (sigma * std::sqrt(L));
        const auto count = static_cast<std::size_t>(std::floor((b - a) / mesh + 1e-9));
        CompensatedSum<cplx> acc;
        for (std::size_t l = 1; l <= count; ++l) acc.add(integrand(a + static_cast<double>(l) * mesh));
        const double phase = std::numbers::sqrt2 * (acc.value() / std::sqrt(L)).real();
        const cplx val = std::exp(r.limit.fock_exponent) * std::polar(1.0, phase);
        r.volumes.push_back(L);
        r.finite_values.push_back(val);
        r.errors.push_back(std::abs(val - r.limit.value));
        r.occupied_modes.push_back(count);
    }
    return r;
}

}  // namespace cohlim
