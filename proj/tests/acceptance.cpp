// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "cohlim/dynamics.hpp"
#include "cohlim/functionals.hpp"
#include "cohlim/gns_reps.hpp"
#include "cohlim/ito_sampler.hpp"
#include "cohlim/moments.hpp"
#include "cohlim/open_system.hpp"
#include "cohlim/stats.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace cohlim;
using testing_support::positivity_floor;
using testing_support::random_density;
using testing_support::random_function;

namespace {

struct Outcome {
    bool passed{true};
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail << " [failed: " << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ClosedForm bump(double center, double width, cplx amp = 1.0, double shift = 0.0) {
    return ClosedForm{ClosedForm::Kind::gaussian, 1, amp, {center}, width, {shift}};
}

// 1. Ito isometry on 20 random functions.
void ito_isometry(Outcome& o) {
    const auto t0 = Clock::now();
    const MomentumGrid g(1, 8.0, 4096);
    RngStream rng(1001, 0);
    std::vector<TestFunction> fs;
    for (int i = 0; i < 20; ++i) fs.push_back(random_function(g, rng));
    const std::size_t M = 20000;
    std::vector<double> acc(fs.size(), 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        const BrownianSample s = BrownianSample::draw(g, 1, m);
        for (std::size_t i = 0; i < fs.size(); ++i) acc[i] += std::norm(ito_integral(fs[i], s.dB1()));
    }
    const double tol = 5.0 * std::sqrt(2.0 / M);
    double worst = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i)
        worst = std::max(worst, std::abs(acc[i] / M / norm_sq_momentum(fs[i]) - 1.0));
    const double dt = seconds_since(t0);
    o.detail << "max rel err " << worst << " (tol " << tol << "), " << dt << " s";
    o.require(worst < tol, "relative error");
    o.require(dt < 30.0, "runtime");
}

// 2. Central limit behaviour for two admissible phase measures.
void clt(Outcome& o) {
    const auto t0 = Clock::now();
    const MomentumGrid g(1, 8.0, 4096);
    const ModeDensity rho = ModeDensity::sample(g, [](const Point& k) { return std::exp(-0.5 * k[0] * k[0]); });
    const TestFunction f = TestFunction::from_closed_form(g, bump(0.5, 0.8, cplx(1.0, 0.3)));
    const std::size_t M = 2000;
    const double tol = 1.95 / std::sqrt(double(M));
    const std::vector<std::pair<const char*, PhaseMeasure>> measures{
        {"uniform", PhaseMeasure::uniform()},
        {"two-atom", PhaseMeasure::atoms({{kPi / 2, 0.5}, {-kPi / 2, 0.5}})}};
    for (const auto& [name, mu] : measures) {
        const auto xs = clt_sample(f, rho, mu, M, 2024, 1);
        const double ks = ks_distance_normal(xs, std::sqrt(sigma_mu_sq(f, rho, fourier_moment(mu, 2))));
        o.detail << name << " KS " << ks << "; ";
        o.require(ks < tol, name);
    }
    const double dt = seconds_since(t0);
    o.detail << "tol " << tol << ", " << dt << " s";
    o.require(dt < 60.0, "runtime");
}

// 3. Variance of Re chi against the phase-averaged variance.
void variance_law(Outcome& o) {
    const auto t0 = Clock::now();
    const MomentumGrid g(1, 8.0, 512);
    RngStream rng(1003, 0);
    const TestFunction f = random_function(g, rng);
    const ModeDensity rho = random_density(g, rng);
    const std::size_t M = 20000;
    double worst = 0.0;
    for (cplx mu2 : {cplx(0.0), cplx(0.5), cplx(-1.0), cplx(0.0, 0.5)}) {
        const CoefficientPair c = build_coefficients(rho, mu2);
        if (mu2 == cplx(-1.0)) o.require(c.alternate_branch, "alternate branch at -1");
        const ChiKernel kernel(f, c);
        std::vector<double> x(M);
        for (std::size_t m = 0; m < M; ++m) x[m] = kernel(BrownianSample::draw(g, 3, m)).real();
        const double var = sample_variance(x), mean = sample_mean(x);
        double m4 = 0.0;
        for (double v : x) m4 += std::pow(v - mean, 4);
        m4 /= double(M);
        const double se = std::sqrt(std::max(0.0, m4 - var * var) / double(M));
        const double z = std::abs(var - sigma_mu_sq(f, rho, mu2)) / se;
        worst = std::max(worst, z);
    }
    const double dt = seconds_since(t0);
    o.detail << "max |z| " << worst << " (tol 5), " << dt << " s";
    o.require(worst < 5.0, "variance z-score");
    o.require(dt < 60.0, "runtime");
}

// 4. Average of the random functional equals the phase-averaged functional.
void commuting_diagram(Outcome& o) {
    const MomentumGrid g(1, 8.0, 512);
    RngStream rng(1004, 0);
    const ModeDensity rho = random_density(g, rng);
    std::vector<TestFunction> battery;
    for (int i = 0; i < 10; ++i) battery.push_back(random_function(g, rng));
    const std::size_t M = 10000;
    const double tol = 4.0 / std::sqrt(double(M));
    double worst = 0.0;
    for (const PhaseMeasure& mu : {PhaseMeasure::uniform(), PhaseMeasure::atoms({{kPi / 2, 0.5}, {-kPi / 2, 0.5}})}) {
        const CoefficientPair c = build_coefficients(rho, fourier_moment(mu, 2));
        std::vector<ChiKernel> kernels;
        for (const auto& f : battery) kernels.emplace_back(f, c);
        std::vector<cplx> acc(battery.size(), 0.0);
        for (std::size_t m = 0; m < M; ++m) {
            const BrownianSample s = BrownianSample::draw(g, 4, m);
            for (std::size_t i = 0; i < battery.size(); ++i)
                acc[i] += std::exp(kernels[i].fock_exponent()) * std::polar(1.0, kernels[i](s).real());
        }
        for (std::size_t i = 0; i < battery.size(); ++i)
            worst = std::max(worst, std::abs(acc[i] / double(M) - phase_averaged_functional(battery[i], rho, mu).value));
    }
    o.detail << "max |mc - averaged| " << worst << " (tol " << tol << ")";
    o.require(worst < tol, "mean deviation");
}

// 5. Wick moments against Monte Carlo; permanent form at zero second moment.
void quasifree_moments(Outcome& o) {
    const MomentumGrid g(1, 6.0, 256);
    RngStream rng(1005, 0);
    const ModeDensity rho = random_density(g, rng);
    std::vector<TestFunction> pool;
    for (int i = 0; i < 4; ++i) pool.push_back(random_function(g, rng));
    double worst_z = 0.0, worst_perm = 0.0;
    const std::vector<std::pair<std::size_t, std::size_t>> even{{1, 1}, {2, 0}, {0, 2}, {2, 2}, {3, 1}};
    const std::vector<std::pair<std::size_t, std::size_t>> odd{{1, 0}, {2, 1}};
    for (cplx mu2 : {cplx(0.0), cplx(0.5, 0.2)}) {
        const CoefficientPair c = build_coefficients(rho, mu2);
        std::uint64_t seed = 50;
        for (const auto& cases : {even, odd}) {
            for (const auto& [p, q] : cases) {
                const std::span<const TestFunction> fs(pool.data(), p), gs(pool.data() + p, q);
                const cplx wick = wick_moment(build_q(fs, gs, rho, mu2));
                if ((p + q) % 2 == 1) o.require(wick == cplx(0.0), "odd moment exactly zero");
                const McEstimate mc = mc_oracle(fs, gs, c, 20000, seed++, 1);
                worst_z = std::max(worst_z, mc.z_score(wick));
                if (mu2 == cplx(0.0)) {
                    const cplx perm = permanent_moment(fs, gs, rho);
                    worst_perm = std::max(worst_perm, std::abs(perm - wick) / std::max(1.0, std::abs(wick)));
                }
            }
        }
    }
    o.detail << "max z " << worst_z << " (tol 5), permanent gap " << worst_perm << " (tol 1e-10)";
    o.require(worst_z < 5.0, "z-score");
    o.require(worst_perm < 1e-10, "permanent");
}

// 6. Representation identity on 20 random triples, normalization pinned first.
void gns_identity(Outcome& o) {
    const auto t0 = Clock::now();
    RngStream rng(1006, 0);
    double pin = 0.0, worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + trial % 3;
        const MomentumGrid g(d, 4.0, d == 1 ? 128 : (d == 2 ? 24 : 10));
        const TestFunction f = random_function(g, rng);
        const ModeDensity rho = random_density(g, rng);
        const ModeDensity rep = representation_density(rho);
        const auto c0 = build_alpha_beta(rep, 0.0);
        const double lhs = norm_sq_momentum(apply_R(f, rep, c0)) + norm_sq_momentum(apply_T(f, rep, c0));
        const double rhs = norm_sq_momentum(f) + 2.0 * std::pow(kTwoPi, d) * sigma_mu_sq(f, rho, 0.0);
        pin = std::max(pin, std::abs(lhs - rhs) / rhs);
        const cplx mu2 = std::polar(std::sqrt(rng.uniform()), kTwoPi * rng.uniform());
        worst = std::max(worst, rep_expectation_averaged(f, rho, mu2).residual());
    }
    const double dt = seconds_since(t0);
    o.detail << "norm identity " << pin << ", max residual " << worst << " (tol 1e-9), " << dt << " s";
    o.require(pin < 1e-10, "normalization");
    o.require(worst < 1e-9, "residual");
    o.require(dt < 5.0, "runtime");
}

// 7. Phase uniformization under the free evolution.
void uniformization(Outcome& o) {
    const MomentumGrid g(1, 10.0, 8192);
    const ModeDensity rho = ModeDensity::sample(g, [](const Point& k) {
        const double u = (k[0] - 4.0) / 0.5;
        return std::exp(-0.5 * u * u);
    });
    const std::vector<TestFunction> battery{TestFunction::from_closed_form(g, bump(4.0, 1.0)),
                                            TestFunction::from_closed_form(g, bump(3.5, 0.7, kI)),
                                            TestFunction::from_closed_form(g, bump(4.5, 1.5, 1.0, 0.3))};
    const Dispersion eps = Dispersion::photon(g);
    const double start = uniformization_metric(battery, rho, 0.5, eps, 0.0);
    const double late = uniformization_metric(battery, rho, 0.5, eps, 100.0);
    double trivial = 0.0;
    for (double t = 0.0; t <= 100.0; t += 2.5) trivial = std::max(trivial, uniformization_metric(battery, rho, 0.0, eps, t));
    o.detail << "metric " << start << " at t=0, " << late << " at t=100 (tol 1e-4), " << trivial << " without second moment";
    o.require(late < 1e-4, "late metric");
    o.require(trivial == 0.0, "zero second moment");
}

// 8. Growth of the coherent phase sum with the number of modes.
void divergence_law(Outcome& o) {
    auto rho = [](const Point&) { return 1.0; };
    auto theta = [](const Point&) { return 0.0; };
    const ClosedForm f1 = bump(0.0, 1.0);
    ClosedForm f2{ClosedForm::Kind::gaussian, 2, 1.0, {0.0, 0.0}, 1.0, {0.0, 0.0}};
    const auto d1 = divergence_diagnostic(f1, rho, theta, 4.0, {256, 512, 1024, 2048, 4096, 8192});
    const auto d2 = divergence_diagnostic(f2, rho, theta, 4.0, {16, 32, 64, 128, 256});
    o.detail << "d=1 exponent " << d1.slope << " (0.5 +- 0.05), d=2 exponent " << d2.slope << " (1.0 +- 0.1)";
    o.require(d1.conclusive && std::abs(d1.slope - 0.5) <= 0.05, "d=1");
    o.require(d2.conclusive && std::abs(d2.slope - 1.0) <= 0.1, "d=2");
}

// 9. Decoherence: Gaussian envelope, short-time Gamma, infrared linear growth.
void decoherence(Outcome& o) {
    const MomentumGrid g(1, 8.0, 2048);
    Eigen::MatrixXcd init(2, 2);
    init << 0.5, 0.5, 0.5, 0.5;
    const SystemSpec sys{{0.0, 1.0},
                          {0.5, -0.5},
                          TestFunction::from_closed_form(g, bump(2.0, 0.8)),
                          Dispersion::photon(g),
                          ModeDensity::sample(g, [](const Point& k) {
                              const double u = (k[0] - 2.0) / 0.5;
                              return 0.5 * std::exp(-0.5 * u * u);
                          }),
                          0.0,
                          init};
    const std::vector<double> ts{0.5, 1.0, 2.0};
    const std::size_t M = 10000;
    const auto mc = random_factor_mc(sys, 0, 1, ts, M, 7, 1);
    const double var = sigma_mu_sq(sys.form_factor, sys.reservoir, sys.mu2);
    double worst = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double predicted = std::exp(-0.5 * ts[i] * ts[i] * var);
        worst = std::max(worst, std::abs(mc[i].mean - predicted) / predicted);
    }
    const double tol = 5.0 / std::sqrt(double(M));
    const double t = 1e-3;
    const double quad = 0.5 * t * t * norm_sq_momentum(sys.form_factor);
    const double short_err = std::abs(gamma(t, sys.form_factor, sys.dispersion) / quad - 1.0);
    const RadialFormFactor ff{3, 1.0, -1.0, 1.0};
    std::vector<double> tt, gg;
    for (double s = 50.0; s <= 200.0; s += 5.0) {
        tt.push_back(s);
        gg.push_back(radial_gamma(s, ff));
    }
    const double slope = least_squares_line(tt, gg).slope;
    const double predicted = 0.5 * kPi * ff.sphere_area() * ff.amplitude * ff.amplitude;
    const double slope_err = std::abs(slope / predicted - 1.0);
    o.detail << "mc rel dev " << worst << " (tol " << tol << "), short-time gap " << short_err
             << " (tol 0.01), infrared slope " << slope << " vs " << predicted << " (gap " << slope_err << ", tol 0.05)";
    o.require(worst < tol, "Gaussian envelope");
    o.require(short_err < 0.01, "short-time Gamma");
    o.require(slope_err < 0.05, "infrared slope");
}

// 10. Normalization, conjugation symmetry and positivity.
void functional_axioms(Outcome& o) {
    const MomentumGrid g(1, 5.0, 128);
    RngStream rng(1010, 0);
    const ModeDensity rho = random_density(g, rng);
    const PhaseMeasure mu = PhaseMeasure::uniform();
    const CoherentModeSet modes{{{0.4}, 1.2, 0.7}, {{-1.1}, 0.4, 2.5}};
    const CoefficientPair c = build_coefficients(rho, cplx(0.3, 0.4));
    const BrownianSample s1 = BrownianSample::draw(g, 10, 0), s2 = BrownianSample::draw(g, 10, 1);
    const std::vector<std::pair<const char*, std::function<cplx(const TestFunction&)>>> functionals{
        {"fock", [](const TestFunction& f) { return fock_functional(f).value; }},
        {"n_mode", [&](const TestFunction& f) { return n_mode_functional(f, modes).value; }},
        {"phase_averaged", [&](const TestFunction& f) { return phase_averaged_functional(f, rho, mu).value; }},
        {"random sample 0", [&](const TestFunction& f) { return random_functional(f, c, s1); }},
        {"random sample 1", [&](const TestFunction& f) { return random_functional(f, c, s2); }},
    };
    double floor = std::numeric_limits<double>::infinity();
    for (const auto& [name, E] : functionals) {
        o.require(E(TestFunction::zero(g)) == cplx(1.0), std::string(name) + " normalization");
        for (int trial = 0; trial < 10; ++trial) {
            const TestFunction f = random_function(g, rng);
            o.require(std::conj(E(f)) == E(-f), std::string(name) + " conjugation");
            std::vector<TestFunction> fs;
            std::vector<cplx> z;
            for (int k = 0; k < 4; ++k) {
                fs.push_back(random_function(g, rng));
                z.push_back(cplx(rng.normal(), rng.normal()));
            }
            floor = std::min(floor, positivity_floor(fs, z, E));
        }
    }
    o.detail << "min eigenvalue " << floor << " (floor -1e-9)";
    o.require(floor >= -1e-9, "positivity");
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"ito isometry", ito_isometry},
        {"central limit", clt},
        {"variance law", variance_law},
        {"averaged random functional", commuting_diagram},
        {"quasifree moments", quasifree_moments},
        {"representation identity", gns_identity},
        {"phase uniformization", uniformization},
        {"divergence law", divergence_law},
        {"decoherence envelope", decoherence},
        {"functional axioms", functional_axioms},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        std::printf("%s %2zu %s: %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.str().c_str());
        std::fflush(stdout);
        failures += o.passed ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
