// dynamics.hpp - free Bogoliubov evolution f -> e^{i t eps} f and the decay of
// phase information it produces.
#pragma once

#include "cohlim/functionals.hpp"
#include "cohlim/mode_space.hpp"

#include <string>
#include <vector>

namespace cohlim {

class Dispersion {
public:
    enum class Form { photon, quadratic, samples };

    static Dispersion photon(const MomentumGrid& grid);
    static Dispersion quadratic(const MomentumGrid& grid);
    /// Values at the grid nodes; point evaluation snaps to the nearest node.
    static Dispersion from_samples(const MomentumGrid& grid, std::vector<double> values);

    Form form() const { return form_; }
    const MomentumGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double at(const Point& k) const;

private:
    Dispersion(Form form, MomentumGrid grid, std::vector<double> values);
    Form form_;
    MomentumGrid grid_;
    std::vector<double> values_;
};

std::string to_string(Dispersion::Form f);
Dispersion::Form dispersion_form(const std::string& name);
Dispersion make_dispersion(const MomentumGrid& grid, Dispersion::Form form);

/// Pointwise e^{i eps t} f_hat. The exact evaluator, if any, is carried along.
TestFunction evolve(const TestFunction& f, const Dispersion& eps, double t);

/// n_mode_functional with theta_j -> theta_j - t eps(k_j).
FunctionalValue n_mode_evolved(const TestFunction& f, const CoherentModeSet& modes, const Dispersion& eps, double t);

/// \int rho (|f_hat|^2 + Re{e^{2 i t eps} mu2 f_hat^2}) dk.
double sigma_t(const TestFunction& f, const ModeDensity& rho, cplx mu2, const Dispersion& eps, double t);

/// max over the battery of |E_mu(e^{i t eps} f) - E_unif(f)| for the
/// phase-averaged functional; E_unif uses mu_hat(2) = 0.
double uniformization_metric(const std::vector<TestFunction>& battery, const ModeDensity& rho, cplx mu2,
                             const Dispersion& eps, double t);

}  // namespace cohlim
