#include "cohlim/gns_reps.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace cohlim;
using testing_support::random_density;
using testing_support::random_function;

TEST(AlphaBeta, TrivialCases) {
    const MomentumGrid g(1, 3.0, 16);
    RngStream rng(1, 0);
    const auto c = build_alpha_beta(random_density(g, rng), 0.0);
    for (std::size_t j = 0; j < g.size(); ++j) {
        EXPECT_EQ(c.alpha[j], 1.0);
        EXPECT_EQ(c.beta[j], cplx(0.0));
    }
    const auto z = build_alpha_beta(ModeDensity::zero(g), cplx(0.6, 0.8));
    for (std::size_t j = 0; j < g.size(); ++j) {
        EXPECT_EQ(z.alpha[j], 1.0);
        EXPECT_EQ(z.beta[j], cplx(0.0));
    }
    EXPECT_THROW(build_alpha_beta(ModeDensity::zero(g), 1.01), std::invalid_argument);
}

TEST(AlphaBeta, DirectArithmetic) {
    const MomentumGrid g(1, 1.0, 2);
    const auto c = build_alpha_beta(ModeDensity::constant(g, 3.0), 1.0);
    const double s = std::sqrt(3.0) / 2;
    EXPECT_NEAR(c.alpha[0], 0.5 * (std::sqrt(1 + s) + std::sqrt(1 - s)), 1e-15);
    EXPECT_NEAR(std::abs(c.beta[0] - 0.5 * (std::sqrt(1 + s) - std::sqrt(1 - s))), 0.0, 1e-15);
    EXPECT_GT(c.alpha[0], 0.0);
}

TEST(AlphaBeta, PhaseCovariance) {
    const MomentumGrid g(1, 3.0, 16);
    RngStream rng(2, 0);
    const ModeDensity rho = random_density(g, rng);
    const cplx mu2(0.3, 0.5);
    const double phi = 1.1;
    const auto a = build_alpha_beta(rho, mu2), b = build_alpha_beta(rho, mu2 * std::polar(1.0, phi));
    for (std::size_t j = 0; j < g.size(); ++j) {
        EXPECT_NEAR(std::abs(b.beta[j]), std::abs(a.beta[j]), 1e-15);
        EXPECT_NEAR(std::abs(b.beta[j] - a.beta[j] * std::polar(1.0, -phi)), 0.0, 1e-15);
        EXPECT_NEAR(b.alpha[j], a.alpha[j], 1e-15);
    }
}

TEST(RT, TrivialCases) {
    const MomentumGrid g(1, 3.0, 32);
    RngStream rng(3, 0);
    const TestFunction f = random_function(g, rng);
    const ModeDensity zero = ModeDensity::zero(g);
    const auto cz = build_alpha_beta(zero, 0.7);
    EXPECT_EQ(apply_R(f, zero, cz).values(), f.values());
    const TestFunction tz = apply_T(f, zero, cz);
    for (auto v : tz.values()) EXPECT_EQ(v, cplx(0.0));
    const ModeDensity rho = random_density(g, rng);
    const auto c0 = build_alpha_beta(rho, 0.0);
    const TestFunction r = apply_R(f, rho, c0), t = apply_T(f, rho, c0);
    for (std::size_t j = 0; j < g.size(); ++j) {
        EXPECT_NEAR(std::abs(r.values()[j] - std::sqrt(1 + rho.values()[j]) * f.values()[j]), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(t.values()[j] - std::sqrt(rho.values()[j]) * std::conj(f.values()[j])), 0.0, 1e-15);
    }
    EXPECT_THROW(apply_R(TestFunction::zero(MomentumGrid(1, 3.0, 16)), rho, c0), std::invalid_argument);
}

TEST(RT, RealButNotComplexLinear) {
    const MomentumGrid g(1, 3.0, 32);
    RngStream rng(4, 0);
    const TestFunction f = random_function(g, rng), h = random_function(g, rng);
    const ModeDensity rho = random_density(g, rng);
    const auto c = build_alpha_beta(rho, cplx(0.4, -0.3));
    for (auto op : {&apply_R, &apply_T}) {
        const auto sum = op(f + h, rho, c), parts = op(f, rho, c) + op(h, rho, c);
        const auto scaled = op(f.scaled(2.5), rho, c), scaled2 = op(f, rho, c).scaled(2.5);
        const auto rot = op(f.scaled(kI), rho, c), rot2 = op(f, rho, c).scaled(kI);
        double lin = 0.0, hom = 0.0, cplx_gap = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            lin = std::max(lin, std::abs(sum.values()[j] - parts.values()[j]));
            hom = std::max(hom, std::abs(scaled.values()[j] - scaled2.values()[j]));
            cplx_gap = std::max(cplx_gap, std::abs(rot.values()[j] - rot2.values()[j]));
        }
        EXPECT_LT(lin, 1e-14);
        EXPECT_LT(hom, 1e-14);
        EXPECT_GT(cplx_gap, 1e-3);
    }
}

TEST(RT, NormOfTStableUnderRefinement) {
    ClosedForm a{ClosedForm::Kind::gaussian, 1, cplx(0.5, 0.5), {0.2}, 0.9, {0.3}};
    auto rho = [](const Point& k) { return 1.2 * std::exp(-k[0] * k[0]); };
    double norms[2];
    int i = 0;
    for (std::size_t n : {512u, 1024u}) {
        const MomentumGrid g(1, 8.0, n);
        const ModeDensity r = ModeDensity::sample(g, rho);
        norms[i++] = norm_sq_momentum(apply_T(TestFunction::from_closed_form(g, a), r, build_alpha_beta(r, 0.6)));
    }
    EXPECT_TRUE(std::isfinite(norms[0]));
    EXPECT_NEAR(norms[0], norms[1], 1e-9);
}

TEST(RepExpectation, RandomRepEqualsRandomFunctional) {
    const MomentumGrid g(1, 5.0, 64);
    RngStream rng(5, 0);
    const ModeDensity rho = random_density(g, rng);
    const auto c = build_coefficients(rho, cplx(0.1, 0.2));
    const BrownianSample s = BrownianSample::draw(g, 3, 0);
    const TestFunction f = random_function(g, rng);
    const RepCheck chk = rep_expectation_random(f, c, s);
    EXPECT_EQ(chk.representation.value, random_functional(f, c, s));
    EXPECT_EQ(chk.residual(), 0.0);
}

TEST(RepExpectation, NormIdentityAtZeroSecondMoment) {
    for (int d = 1; d <= 3; ++d) {
        const MomentumGrid g(d, 4.0, d == 1 ? 128 : (d == 2 ? 24 : 10));
        RngStream rng(6 + d, 0);
        const TestFunction f = random_function(g, rng);
        const ModeDensity rho = random_density(g, rng);
        const ModeDensity rep = representation_density(rho);
        const auto c = build_alpha_beta(rep, 0.0);
        const double lhs = norm_sq_momentum(apply_R(f, rep, c)) + norm_sq_momentum(apply_T(f, rep, c));
        const double rhs = norm_sq_momentum(f) + 2 * std::pow(kTwoPi, d) * sigma_mu_sq(f, rho, 0.0);
        EXPECT_NEAR(lhs, rhs, 1e-10 * rhs) << d;
    }
}

TEST(RepExpectation, AveragedRepReproducesPhaseAveragedFunctional) {
    RngStream rng(9, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + trial % 3;
        const MomentumGrid g(d, 4.0, d == 1 ? 128 : (d == 2 ? 24 : 10));
        const TestFunction f = random_function(g, rng);
        const ModeDensity rho = random_density(g, rng);
        const cplx mu2 = std::polar(std::sqrt(rng.uniform()), kTwoPi * rng.uniform());
        EXPECT_LT(rep_expectation_averaged(f, rho, mu2).residual(), 1e-9) << trial;
    }
    const MomentumGrid g(1, 4.0, 64);
    const TestFunction f = random_function(g, rng);
    const ModeDensity rho = random_density(g, rng);
    EXPECT_LT(rep_expectation_averaged(f, rho, 1.0).residual(), 1e-9);
    EXPECT_LT(rep_expectation_averaged(f, rho, -1.0).residual(), 1e-9);
}

TEST(RepExpectation, NModeRepIsBesselProduct) {
    const MomentumGrid g(1, 5.0, 64);
    ClosedForm a{ClosedForm::Kind::gaussian, 1, cplx(1.0, 0.4), {0.3}, 1.0, {0.2}};
    const TestFunction f = TestFunction::from_closed_form(g, a);
    const CoherentModeSet modes{{{0.1}, 0.8, 0.0}, {{-0.7}, 2.0, 1.0}, {{1.3}, 0.3, 4.0}};
    const RepCheck chk = rep_expectation_nmode(f, modes);
    EXPECT_LT(chk.residual(), 1e-12);
    double expected = fock_functional(f).value.real();
    for (const auto& m : modes) expected *= std::cyl_bessel_j(0.0, std::sqrt(2 * m.rho) * std::abs(a.momentum(m.k)));
    EXPECT_NEAR(chk.representation.value.real(), expected, 1e-12);
    EXPECT_NEAR(chk.representation.value.imag(), 0.0, 1e-14);
}
