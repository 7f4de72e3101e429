#include "cohlim/dynamics.hpp"

#include <stdexcept>

namespace cohlim {

Dispersion::Dispersion(Form form, MomentumGrid grid, std::vector<double> values)
    : form_(form), grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("Dispersion: size does not match grid");
    for (double e : values_)
        if (!std::isfinite(e) || e < 0.0) throw std::invalid_argument("Dispersion: values must be finite and >= 0");
}

Dispersion Dispersion::photon(const MomentumGrid& grid) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = grid.node_norm(j);
    return Dispersion(Form::photon, grid, std::move(v));
}

Dispersion Dispersion::quadratic(const MomentumGrid& grid) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double r = grid.node_norm(j);
        v[j] = r * r;
    }
    return Dispersion(Form::quadratic, grid, std::move(v));
}

Dispersion Dispersion::from_samples(const MomentumGrid& grid, std::vector<double> values) {
    return Dispersion(Form::samples, grid, std::move(values));
}

double Dispersion::at(const Point& k) const {
    switch (form_) {
    case Form::photon: return norm_of(k, grid_.dim());
    case Form::quadratic: {
        const double r = norm_of(k, grid_.dim());
        return r * r;
    }
    case Form::samples: break;
    }
    return values_[grid_.nearest(k)];
}

std::string to_string(Dispersion::Form f) {
    switch (f) {
    case Dispersion::Form::photon: return "photon";
    case Dispersion::Form::quadratic: return "quadratic";
    case Dispersion::Form::samples: return "samples";
    }
    return "?";
}

Dispersion::Form dispersion_form(const std::string& name) {
    if (name == "photon") return Dispersion::Form::photon;
    if (name == "quadratic") return Dispersion::Form::quadratic;
    if (name == "samples") return Dispersion::Form::samples;
    throw std::invalid_argument("unknown dispersion '" + name + "'");
}

Dispersion make_dispersion(const MomentumGrid& grid, Dispersion::Form form) {
    switch (form) {
    case Dispersion::Form::photon: return Dispersion::photon(grid);
    case Dispersion::Form::quadratic: return Dispersion::quadratic(grid);
    case Dispersion::Form::samples: break;
    }
    throw std::invalid_argument("make_dispersion: sampled dispersions need explicit values");
}

TestFunction evolve(const TestFunction& f, const Dispersion& eps, double t) {
    require_same_grid(f.grid(), eps.grid(), "evolve");
    std::vector<cplx> v(f.values().size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::polar(1.0, eps.values()[j] * t) * f.values()[j];
    TestFunction::Evaluator exact;
    if (f.has_exact()) {
        exact = [g = f.exact(), eps, t](const Point& k) { return std::polar(1.0, eps.at(k) * t) * g(k); };
    }
    return TestFunction(f.grid(), std::move(v), std::move(exact), f.label());
}

FunctionalValue n_mode_evolved(const TestFunction& f, const CoherentModeSet& modes, const Dispersion& eps, double t) {
    CoherentModeSet shifted = modes;
    for (auto& m : shifted) m.theta -= t * eps.at(m.k);
    return n_mode_functional(f, validated(std::move(shifted)));
}

double sigma_t(const TestFunction& f, const ModeDensity& rho, cplx mu2, const Dispersion& eps, double t) {
    if (std::abs(mu2) > 1.0 + 1e-12) throw std::invalid_argument("sigma_t: |mu_hat(2)| must be <= 1");
    require_same_grid(f.grid(), rho.grid(), "sigma_t");
    require_same_grid(f.grid(), eps.grid(), "sigma_t");
    CompensatedSum<double> acc;
    for (std::size_t j = 0; j < f.values().size(); ++j) {
        const cplx fj = f.values()[j];
        const cplx rot = std::polar(1.0, 2.0 * t * eps.values()[j]) * mu2;
        acc.add(rho.values()[j] * (std::norm(fj) + (rot * fj * fj).real()));
    }
    return std::max(0.0, acc.value() * f.grid().cell_volume());
}

double uniformization_metric(const std::vector<TestFunction>& battery, const ModeDensity& rho, cplx mu2,
                             const Dispersion& eps, double t) {
    if (battery.empty()) throw std::invalid_argument("uniformization_metric: empty battery");
    double worst = 0.0;
    for (const auto& f : battery) {
        // E_Fock is invariant under the evolution, so only the variances differ.
        const double fock = std::exp(fock_exponent(f));
        const double evolved = std::exp(-0.5 * sigma_t(f, rho, mu2, eps, t));
        const double unif = std::exp(-0.5 * sigma_t(f, rho, 0.0, eps, 0.0));
        worst = std::max(worst, fock * std::abs(evolved - unif));
    }
    return worst;
}

}  // namespace cohlim
