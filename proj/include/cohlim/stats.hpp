// stats.hpp - small statistics kit for the Monte Carlo checks.
#pragma once

#include "cohlim/numeric.hpp"

#include <span>
#include <vector>

namespace cohlim {

double normal_cdf(double x, double sigma = 1.0);

double sample_mean(std::span<const double> xs);
/// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> xs);

/// sup_x |F_emp(x) - Phi(x / sigma)| for zero-mean normal reference.
double ks_distance_normal(std::vector<double> xs, double sigma);
/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);

struct MeanEstimate {
    double mean;
    double stderr_;  // delete-one jackknife standard error
};
MeanEstimate jackknife_mean(std::span<const double> xs);

struct LineFit {
    double slope;
    double intercept;
};
LineFit least_squares_line(std::span<const double> x, std::span<const double> y);
/// Slope of log|y| against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace cohlim
