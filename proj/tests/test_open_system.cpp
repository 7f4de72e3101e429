#include "cohlim/open_system.hpp"
#include "cohlim/stats.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace cohlim;

namespace {

SystemSpec two_level(double rho_peak = 0.5, cplx mu2 = 0.0, std::vector<double> couplings = {0.5, -0.5}) {
    const MomentumGrid g(1, 8.0, 2048);
    // Centered away from k = 0 so that |g_hat / eps|^2 is finite.
    const ClosedForm ff{ClosedForm::Kind::gaussian, 1, 1.0, {3.0}, 0.5, {0.0}};
    Eigen::MatrixXcd init(2, 2);
    init << 0.6, cplx(0.3, 0.2), cplx(0.3, -0.2), 0.4;
    return SystemSpec{{0.0, 1.0},
                      std::move(couplings),
                      TestFunction::from_closed_form(g, ff),
                      Dispersion::photon(g),
                      ModeDensity::sample(g, [=](const Point& k) {
                          const double u = (k[0] - 3.0) / 0.5;
                          return rho_peak * std::exp(-0.5 * u * u);
                      }),
                      mu2,
                      init};
}

// Closed form of 2 S c^2 \int_0^inf sin^2(r t / 2) r^{-2} e^{-r^2 / L^2} dr,
// obtained by differentiating in t: the derivative is a Gaussian-damped sine integral, (pi/2) erf.
double radial_gamma_d3_oracle(double t, double c, double L) {
    const double a = 0.5 * t, b = 1.0 / (L * L);
    const double inner = 0.5 * kPi * (a * std::erf(a / std::sqrt(b)) + std::sqrt(b / kPi) * (std::exp(-a * a / b) - 1.0));
    return 2.0 * 4.0 * kPi * c * c * inner;
}

}  // namespace

TEST(SystemSpec, Validation) {
    SystemSpec s = two_level();
    EXPECT_NO_THROW(s.validate());
    s.couplings.pop_back();
    EXPECT_THROW(s.validate(), std::invalid_argument);
    SystemSpec one = two_level();
    one.energies = {0.0};
    one.couplings = {1.0};
    one.initial = Eigen::MatrixXcd::Identity(1, 1);
    EXPECT_THROW(one.validate(), std::invalid_argument);
}

TEST(Gamma, ZeroAtOriginQuadraticAtSmallTimes) {
    const SystemSpec s = two_level();
    EXPECT_EQ(gamma(0.0, s.form_factor, s.dispersion), 0.0);
    const double t = 1e-3;
    const double quad = 0.5 * t * t * norm_sq_momentum(s.form_factor);
    EXPECT_NEAR(gamma(t, s.form_factor, s.dispersion), quad, 0.01 * quad);
    for (double tt : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
        const double gv = gamma(tt, s.form_factor, s.dispersion);
        EXPECT_GE(gv, 0.0);
        EXPECT_LE(gv, 0.5 * tt * tt * norm_sq_momentum(s.form_factor) * (1 + 1e-12));
    }
}

TEST(Gamma, RejectsFormFactorOnFlatDispersion) {
    const SystemSpec s = two_level();
    const auto flat = Dispersion::from_samples(s.form_factor.grid(), std::vector<double>(s.form_factor.grid().size(), 0.0));
    EXPECT_THROW(gamma(1.0, s.form_factor, flat), std::invalid_argument);
    EXPECT_EQ(gamma(1.0, TestFunction::zero(s.form_factor.grid()), flat), 0.0);
}

TEST(Gamma, PlateauMatchesLateTimes) {
    const SystemSpec s = two_level();
    const PlateauResult p = gamma_plateau(s.form_factor, s.dispersion);
    EXPECT_FALSE(p.divergent);
    EXPECT_NEAR(gamma(200.0, s.form_factor, s.dispersion), p.value, 0.02 * p.value);
    EXPECT_EQ(p.cutoffs.size(), p.partial_sums.size());
    for (std::size_t i = 1; i < p.partial_sums.size(); ++i) EXPECT_GE(p.partial_sums[i], p.partial_sums[i - 1]);
    const PlateauResult z = gamma_plateau(TestFunction::zero(s.form_factor.grid()), s.dispersion);
    EXPECT_EQ(z.value, 0.0);
    EXPECT_FALSE(z.divergent);
}

TEST(Gamma, PlateauFlagsInfraredDivergenceOnGrid) {
    const MomentumGrid g(1, 1.0, 1 << 16);
    const ClosedForm flat{ClosedForm::Kind::gaussian, 1, 1.0, {0.0}, 1.0, {0.0}};
    EXPECT_TRUE(gamma_plateau(TestFunction::from_closed_form(g, flat), Dispersion::photon(g)).divergent);
}

TEST(Radial, MatchesClosedFormOracle) {
    const RadialFormFactor ff{3, 0.7, -1.0, 1.5};
    for (double t : {0.01, 0.5, 3.0, 40.0, 200.0}) {
        const double expect = radial_gamma_d3_oracle(t, 0.7, 1.5);
        EXPECT_NEAR(radial_gamma(t, ff), expect, 1e-8 * expect) << t;
    }
}

TEST(Radial, LinearGrowthSlope) {
    const RadialFormFactor ff{3, 0.7, -1.0, 1.5};
    const double predicted = infrared_slope_prediction(ff);
    EXPECT_NEAR(predicted, 0.5 * kPi * 4.0 * kPi * 0.49, 1e-12);
    std::vector<double> ts, gs;
    for (double t = 50.0; t <= 200.0; t += 5.0) {
        ts.push_back(t);
        gs.push_back(radial_gamma(t, ff));
    }
    const double slope = least_squares_line(ts, gs).slope;
    EXPECT_NEAR(slope, predicted, 0.05 * predicted);
    EXPECT_THROW(infrared_slope_prediction(RadialFormFactor{3, 1.0, 0.0, 1.0}), std::invalid_argument);
    EXPECT_TRUE(radial_plateau(ff).divergent);
}

TEST(Radial, ConvergentPlateau) {
    const RadialFormFactor ff{3, 1.0, 0.0, 1.0};
    const PlateauResult p = radial_plateau(ff);
    EXPECT_FALSE(p.divergent);
    const double exact = 4.0 * kPi * 0.5 * std::sqrt(kPi);  // S_2 \int e^{-r^2} dr
    EXPECT_NEAR(p.value, exact, 1e-6 * exact);
    EXPECT_NEAR(radial_gamma(400.0, ff), exact, 0.02 * exact);
    EXPECT_TRUE(radial_plateau(RadialFormFactor{3, 1.0, -0.5, 1.0}).divergent);
}

TEST(ReducedDynamics, PopulationsAndModuli) {
    const SystemSpec s = two_level();
    const auto b1 = BrownianSample::draw(s.form_factor.grid(), 1, 0);
    const auto b2 = BrownianSample::draw(s.form_factor.grid(), 2, 0);
    for (double t : {0.0, 0.7, 5.0}) {
        for (std::size_t k = 0; k < 2; ++k) {
            EXPECT_LT(std::abs(reduced_element(s, k, k, t).value - s.initial(k, k)), 1e-15);
            EXPECT_LT(std::abs(reduced_element(s, k, k, t, &b1).value - s.initial(k, k)), 1e-15);
        }
        const double m1 = std::abs(reduced_element(s, 0, 1, t, &b1).value);
        const double m2 = std::abs(reduced_element(s, 0, 1, t, &b2).value);
        EXPECT_NEAR(m1, m2, 1e-14);
        EXPECT_NEAR(std::abs(reduced_element(s, 0, 1, t, &b1).random_factor), 1.0, 1e-14);
    }
    const SystemSpec same = two_level(0.5, 0.0, {0.3, 0.3});
    for (double t : {0.5, 3.0, 30.0}) {
        EXPECT_NEAR(std::abs(reduced_element(same, 0, 1, t, &b1).value), std::abs(same.initial(0, 1)), 1e-14);
        EXPECT_NEAR(averaged_offdiagonal(same, 0, 1, t), std::abs(same.initial(0, 1)), 1e-14);
    }
    const auto traj = reduced_trajectory(s, 0, 1, {0.0, 1.0, 2.0});
    ASSERT_EQ(traj.trajectory.size(), 3u);
    EXPECT_LT(std::abs(traj.trajectory[0] - s.initial(0, 1)), 1e-15);
}

TEST(ReducedDynamics, AveragedMatrixIsADensityMatrix) {
    const SystemSpec s = two_level(0.5, cplx(0.2, 0.4));
    for (double t : {0.0, 0.5, 2.0, 20.0}) {
        const Eigen::MatrixXcd m = averaged_matrix(s, t);
        EXPECT_NEAR(std::abs(m.trace() - s.initial.trace()), 0.0, 1e-14);
        EXPECT_LT((m - m.adjoint()).norm(), 1e-14);
        EXPECT_LT(std::abs(m(0, 0) - s.initial(0, 0)), 1e-15);
        EXPECT_NEAR(std::abs(m(0, 1)), averaged_offdiagonal(s, 0, 1, t), 1e-14);
    }
}

TEST(ReducedDynamics, EnvelopeLimits) {
    const SystemSpec s = two_level();
    EXPECT_NEAR(averaged_offdiagonal(s, 0, 1, 0.0), std::abs(s.initial(0, 1)), 1e-15);
    SystemSpec empty = two_level(0.0);
    for (double t : {0.5, 2.0, 8.0}) {
        EXPECT_NEAR(averaged_offdiagonal(empty, 0, 1, t), gamma_envelope(empty, 0, 1, t), 1e-15);
        EXPECT_LE(averaged_offdiagonal(s, 0, 1, t), gamma_envelope(s, 0, 1, t) + 1e-15);
        const double g = gamma(t, s.form_factor, s.dispersion);
        EXPECT_NEAR(gamma_envelope(s, 0, 1, t), std::exp(-0.5 * g) * std::abs(s.initial(0, 1)), 1e-14);
    }
}

TEST(ReducedDynamics, MonteCarloRandomFactor) {
    const SystemSpec s = two_level();
    const std::vector<double> ts{0.5, 1.0, 2.0};
    const std::size_t m = 10000;
    const auto mc = random_factor_mc(s, 0, 1, ts, m, 7, 1);
    const double var = sigma_mu_sq(s.form_factor, s.reservoir, s.mu2);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double predicted = std::exp(-0.5 * ts[i] * ts[i] * var);
        EXPECT_LT(std::abs(mc[i].mean - predicted), 5.0 / std::sqrt(double(m))) << ts[i];
    }
    const auto again = random_factor_mc(s, 0, 1, ts, 1000, 7, 1);
    const auto again2 = random_factor_mc(s, 0, 1, ts, 1000, 7, 1);
    EXPECT_EQ(again[2].mean, again2[2].mean);
}

TEST(ReducedDynamics, GaussianEnvelopeOvertakesExponential) {
    const SystemSpec s = two_level();
    std::vector<double> ts;
    for (double t = 0.0; t <= 10.0; t += 0.05) ts.push_back(t);
    const auto cmp = exponential_crossover(s, 0, 1, ts, 0.5);
    EXPECT_GT(cmp.rate, 0.0);
    ASSERT_TRUE(std::isfinite(cmp.crossover));
    for (std::size_t i = 0; i < cmp.times.size(); ++i)
        if (cmp.times[i] > cmp.crossover) EXPECT_LT(cmp.envelope[i], std::exp(-cmp.rate * cmp.times[i]));
}
