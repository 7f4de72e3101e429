#include "cohlim/open_system.hpp"

#include "cohlim/parallel.hpp"
#include "cohlim/stats.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <limits>
#include <stdexcept>

namespace cohlim {

void SystemSpec::validate() const {
    const std::size_t n = energies.size();
    if (n < 2) throw std::invalid_argument("SystemSpec: need at least two levels");
    if (couplings.size() != n) throw std::invalid_argument("SystemSpec: couplings and energies differ in length");
    if (initial.rows() != static_cast<Eigen::Index>(n) || initial.cols() != static_cast<Eigen::Index>(n))
        throw std::invalid_argument("SystemSpec: initial state must be N x N");
    for (double v : energies)
        if (!std::isfinite(v)) throw std::invalid_argument("SystemSpec: non-finite energy");
    for (double v : couplings)
        if (!std::isfinite(v)) throw std::invalid_argument("SystemSpec: non-finite coupling");
    require_same_grid(form_factor.grid(), dispersion.grid(), "SystemSpec");
    require_same_grid(form_factor.grid(), reservoir.grid(), "SystemSpec");
    if (std::abs(mu2) > 1.0 + 1e-12) throw std::invalid_argument("SystemSpec: |mu_hat(2)| must be <= 1");
}

namespace {

void check_infrared(const TestFunction& g, const Dispersion& eps, const char* what) {
    require_same_grid(g.grid(), eps.grid(), what);
    std::size_t bad = 0;
    for (std::size_t j = 0; j < g.values().size(); ++j)
        if (eps.values()[j] < kInfraredCutoff && std::norm(g.values()[j]) > 0.0) ++bad;
    if (bad > (std::size_t{1} << g.grid().dim()))
        throw std::invalid_argument(std::string(what) + ": dispersion vanishes on a region where the form factor does not");
}

// sin^2(x/2)/x^2 * t^2 without cancellation for small eps t.
double sin_half_sq_over(double e, double t) {
    const double x = e * t;
    if (std::abs(x) < 1e-4) return t * t * (0.25 - x * x / 48.0);
    const double s = std::sin(0.5 * x);
    return s * s / (e * e);
}

}  // namespace

double gamma(double t, const TestFunction& g, const Dispersion& eps) {
    check_infrared(g, eps, "gamma");
    CompensatedSum<double> acc;
    for (std::size_t j = 0; j < g.values().size(); ++j) {
        const double e = eps.values()[j];
        if (e < kInfraredCutoff) continue;
        acc.add(std::norm(g.values()[j]) * sin_half_sq_over(e, t));
    }
    return 2.0 * acc.value() * g.grid().cell_volume();
}

double shift_integral(double t, const TestFunction& g, const Dispersion& eps) {
    check_infrared(g, eps, "shift_integral");
    CompensatedSum<double> acc;
    for (std::size_t j = 0; j < g.values().size(); ++j) {
        const double e = eps.values()[j];
        if (e < kInfraredCutoff) continue;
        const double x = e * t;
        const double term = std::abs(x) < 1e-3 ? -x * x * x / 6.0 * (1.0 - x * x / 20.0) / e : (std::sin(x) - x) / e;
        acc.add(std::norm(g.values()[j]) * term);
    }
    return acc.value() * g.grid().cell_volume();
}

namespace {

void check_levels(const SystemSpec& sys, std::size_t k, std::size_t l) {
    if (k >= sys.levels() || l >= sys.levels()) throw std::out_of_range("level index out of range");
}

// Everything in rho_kl(t) except the random factor.
cplx deterministic_part(const SystemSpec& sys, std::size_t k, std::size_t l, double t) {
    const double dg = sys.couplings[k] - sys.couplings[l];
    const double dg2 = sys.couplings[k] * sys.couplings[k] - sys.couplings[l] * sys.couplings[l];
    const double free_phase = -t * (sys.energies[k] - sys.energies[l]);
    double shift = 0.0, decay = 0.0;
    if (dg2 != 0.0) shift = 0.5 * dg2 * shift_integral(t, sys.form_factor, sys.dispersion);
    if (dg != 0.0) decay = -0.5 * dg * dg * gamma(t, sys.form_factor, sys.dispersion);
    return std::exp(cplx(decay, free_phase + shift)) * sys.initial(k, l);
}

double gaussian_envelope(const SystemSpec& sys, std::size_t k, std::size_t l, double t) {
    const double dg = sys.couplings[k] - sys.couplings[l];
    if (dg == 0.0) return 1.0;
    const double var = sigma_mu_sq(sys.form_factor, sys.reservoir, sys.mu2);
    return std::exp(-0.5 * t * t * dg * dg * var);
}

}  // namespace

ElementValue reduced_element(const SystemSpec& sys, std::size_t k, std::size_t l, double t,
                             const BrownianSample* sample) {
    check_levels(sys, k, l);
    ElementValue out{deterministic_part(sys, k, l, t), 1.0, gaussian_envelope(sys, k, l, t)};
    if (sample) {
        const double dg = sys.couplings[k] - sys.couplings[l];
        const CoefficientPair coeffs = build_coefficients(sys.reservoir, sys.mu2);
        const double x = chi_omega(sys.form_factor, coeffs, *sample).real();
        out.random_factor = std::polar(1.0, -t * dg * x);
        out.value *= out.random_factor;
    }
    return out;
}

ReducedElement reduced_trajectory(const SystemSpec& sys, std::size_t k, std::size_t l,
                                  const std::vector<double>& times, const BrownianSample* sample) {
    check_levels(sys, k, l);
    ReducedElement r{k, l, sys.initial(k, l), times, {}};
    r.trajectory.reserve(times.size());
    for (double t : times) r.trajectory.push_back(reduced_element(sys, k, l, t, sample).value);
    return r;
}

double averaged_offdiagonal(const SystemSpec& sys, std::size_t k, std::size_t l, double t) {
    check_levels(sys, k, l);
    return gaussian_envelope(sys, k, l, t) * gamma_envelope(sys, k, l, t);
}

double gamma_envelope(const SystemSpec& sys, std::size_t k, std::size_t l, double t) {
    check_levels(sys, k, l);
    const double dg = sys.couplings[k] - sys.couplings[l];
    const double g = dg == 0.0 ? 0.0 : gamma(t, sys.form_factor, sys.dispersion);
    return std::exp(-0.5 * dg * dg * g) * std::abs(sys.initial(k, l));
}

cplx averaged_element(const SystemSpec& sys, std::size_t k, std::size_t l, double t) {
    check_levels(sys, k, l);
    return deterministic_part(sys, k, l, t) * gaussian_envelope(sys, k, l, t);
}

Eigen::MatrixXcd averaged_matrix(const SystemSpec& sys, double t) {
    sys.validate();
    const auto n = static_cast<Eigen::Index>(sys.levels());
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l)
            m(k, l) = averaged_element(sys, static_cast<std::size_t>(k), static_cast<std::size_t>(l), t);
    return m;
}

std::vector<McEstimate> random_factor_mc(const SystemSpec& sys, std::size_t k, std::size_t l,
                                         const std::vector<double>& times, std::size_t samples, std::uint64_t seed,
                                         unsigned threads) {
    check_levels(sys, k, l);
    if (samples < 2) throw std::invalid_argument("random_factor_mc: need at least two samples");
    const CoefficientPair coeffs = build_coefficients(sys.reservoir, sys.mu2);
    const ChiKernel kernel(sys.form_factor, coeffs);
    const MomentumGrid& grid = sys.form_factor.grid();
    std::vector<double> x(samples);
    parallel_for(samples, threads, [&](std::size_t m) {
        x[m] = kernel(BrownianSample::draw(grid, seed, m)).real();
    });
    const double dg = sys.couplings[k] - sys.couplings[l];
    std::vector<McEstimate> out;
    std::vector<double> re(samples), im(samples);
    for (double t : times) {
        for (std::size_t m = 0; m < samples; ++m) {
            re[m] = std::cos(t * dg * x[m]);
            im[m] = -std::sin(t * dg * x[m]);
        }
        const MeanEstimate a = jackknife_mean(re), b = jackknife_mean(im);
        out.push_back(McEstimate{cplx(a.mean, b.mean), a.stderr_, b.stderr_, samples});
    }
    return out;
}

namespace {

PlateauResult decade_partial_sums(const std::function<double(double)>& shell, double top, int decades) {
    // shell(lo) integrates over [lo, 10 lo); top is the integral over eps >= 1.
    PlateauResult r;
    double total = top;
    std::vector<double> increments;
    for (int m = 0; m <= decades; ++m) {
        const double lo = std::pow(10.0, -m);
        if (m > 0) {
            const double inc = shell(lo);
            increments.push_back(inc);
            total += inc;
        }
        r.cutoffs.push_back(lo);
        r.partial_sums.push_back(total);
    }
    r.value = total;
    // Compare the last few decades: a convergent integrand loses a fixed
    // factor per decade, a divergent one does not.
    const std::size_t n = increments.size();
    if (n >= 3) {
        const double a = increments[n - 3], b = increments[n - 2], c = increments[n - 1];
        const double scale = std::max(std::abs(total), 1e-300);
        if (std::abs(c) > 1e-14 * scale && std::abs(b) > 1e-14 * scale) {
            const double ratio = c / b;
            r.divergent = ratio >= 1.0 - 1e-9 && b / a >= 1.0 - 1e-9;
            if (!r.divergent && ratio > 0.0 && ratio < 1.0) r.value += c * ratio / (1.0 - ratio);
        }
    }
    return r;
}

}  // namespace

PlateauResult gamma_plateau(const TestFunction& g, const Dispersion& eps) {
    check_infrared(g, eps, "gamma_plateau");
    const double dk = g.grid().cell_volume();
    std::size_t hits = 0;
    auto band = [&](double lo, double hi) {
        CompensatedSum<double> acc;
        hits = 0;
        for (std::size_t j = 0; j < g.values().size(); ++j) {
            const double e = eps.values()[j];
            if (e < std::max(lo, kInfraredCutoff) || e >= hi) continue;
            acc.add(std::norm(g.values()[j]) / (e * e));
            ++hits;
        }
        return acc.value() * dk;
    };
    PlateauResult r;
    double total = band(1.0, std::numeric_limits<double>::infinity());
    r.cutoffs.push_back(1.0);
    r.partial_sums.push_back(total);
    // Increment of the innermost shell that still contains grid cells.
    double innermost = 0.0;
    for (int m = 1; m <= 8; ++m) {
        const double lo = std::pow(10.0, -m);
        const double shell = band(lo, 10.0 * lo);
        if (hits > 0) innermost = shell;
        total += shell;
        r.cutoffs.push_back(lo);
        r.partial_sums.push_back(total);
    }
    r.value = total;
    // On a grid the partial sums always stop growing below the finest cell, so
    // divergence is only flagged when the innermost occupied shell dominates.
    r.divergent = total > 0.0 && innermost > 0.5 * total;
    return r;
}

double RadialFormFactor::sphere_area() const {
    switch (dim) {
    case 1: return 2.0;
    case 2: return kTwoPi;
    case 3: return 4.0 * kPi;
    default: throw std::invalid_argument("RadialFormFactor: dimension must be 1, 2 or 3");
    }
}

double RadialFormFactor::density(double r) const {
    return amplitude * amplitude * std::pow(r, 2.0 * exponent) * std::exp(-r * r / (cutoff * cutoff));
}

namespace {

double radial_extent(const RadialFormFactor& ff) { return ff.cutoff * std::sqrt(45.0); }

}  // namespace

double radial_gamma(double t, const RadialFormFactor& ff) {
    const double area = ff.sphere_area();
    const double power = 2.0 * ff.exponent + ff.dim - 1.0;  // r^{d-1} |g|^2 ~ r^power
    if (power <= -1.0) throw std::invalid_argument("radial_gamma: form factor not square-integrable at 0");
    if (t == 0.0) return 0.0;
    auto integrand = [&](double r) {
        if (r <= 0.0) return 0.0;
        return std::pow(r, ff.dim - 1.0) * ff.density(r) * sin_half_sq_over(r, t);
    };
    using boost::math::quadrature::gauss_kronrod;
    const double rmax = radial_extent(ff);
    const double panel = std::min(0.25, kPi / std::abs(t));
    double total = 0.0;
    double a = 0.0;
    if (power < 0.0) {
        boost::math::quadrature::tanh_sinh<double> ts;
        total += ts.integrate(integrand, 0.0, panel);
        a = panel;
    }
    while (a < rmax) {
        const double b = std::min(rmax, a + panel);
        total += gauss_kronrod<double, 31>::integrate(integrand, a, b, 8, 1e-13);
        a = b;
    }
    return 2.0 * area * total;
}

PlateauResult radial_plateau(const RadialFormFactor& ff) {
    const double area = ff.sphere_area();
    auto integrand = [&](double r) { return area * std::pow(r, ff.dim - 3.0) * ff.density(r); };
    using boost::math::quadrature::gauss_kronrod;
    const double top = gauss_kronrod<double, 61>::integrate(integrand, 1.0, std::max(2.0, radial_extent(ff)), 10, 1e-13);
    auto shell = [&](double lo) { return gauss_kronrod<double, 61>::integrate(integrand, lo, 10.0 * lo, 10, 1e-13); };
    return decade_partial_sums(shell, top, 12);
}

double infrared_slope_prediction(const RadialFormFactor& ff) {
    const double power = 2.0 * ff.exponent + ff.dim - 1.0;
    if (std::abs(power) > 1e-12)
        throw std::invalid_argument("infrared_slope_prediction: Gamma grows linearly only when 2p + d - 1 = 0");
    // r^{d-1} |g|^2 -> c^2 here, and \int_0^inf sin^2(rt/2)/r^2 dr = pi t / 4.
    return 0.5 * kPi * ff.sphere_area() * ff.amplitude * ff.amplitude;
}

ExponentialComparison exponential_crossover(const SystemSpec& sys, std::size_t k, std::size_t l,
                                            const std::vector<double>& times, double fit_window) {
    check_levels(sys, k, l);
    ExponentialComparison out;
    out.times = times;
    const double a0 = std::abs(sys.initial(k, l));
    if (a0 == 0.0) throw std::invalid_argument("exponential_crossover: rho_kl(0) = 0");
    double num = 0.0, den = 0.0;
    for (double t : times) {
        const double a = averaged_offdiagonal(sys, k, l, t) / a0;
        out.envelope.push_back(a);
        if (t > 0.0 && t <= fit_window && a > 0.0) {
            num += t * std::log(a);
            den += t * t;
        }
    }
    if (den == 0.0) throw std::invalid_argument("exponential_crossover: no positive times inside the fit window");
    out.rate = -num / den;
    out.crossover = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = times.size(); i-- > 0;) {
        if (times[i] <= 0.0 || out.envelope[i] >= std::exp(-out.rate * times[i])) break;
        out.crossover = times[i];
    }
    return out;
}

}  // namespace cohlim
