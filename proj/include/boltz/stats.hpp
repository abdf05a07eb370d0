#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace boltz {

struct TestResult {
    double statistic = 0;
    double dof = 0;
    double p_value = 1;
};

struct MeanError {
    double mean = 0;
    double stderr_ = 0;
};

/// Mean and standard error assuming independent values.
MeanError mean_error(std::span<const double> values);

/// Mean and standard error from `batches` contiguous batch means.
MeanError batch_means(std::span<const double> values, std::size_t batches);

double sample_variance(std::span<const double> values);

double chi_square_sf(double x, double dof);

/// Pearson goodness of fit; categories with expected count below `min_expected` are pooled.
TestResult chi_square_gof(std::span<const double> observed, const Eigen::VectorXd& probabilities, double min_expected = 5);

/// Two-sample homogeneity test on two histograms with the same bins; empty columns are dropped.
TestResult chi_square_homogeneity(std::span<const double> a, std::span<const double> b);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_sf(double lambda);

/// p-value of a sup-distance D between an empirical CDF from n effective samples and the truth.
double ks_p_value(double D, double n_eff);

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Multivariate test that the visit frequencies of a correlated chain match `probabilities`:
/// Hotelling T^2 on batch means of state indicators, compared with F(k, B - k).
TestResult batch_means_frequency_test(std::span<const int> states, const Eigen::VectorXd& probabilities,
                                      std::size_t batches, double min_expected = 50);

std::vector<double> thin(std::span<const double> values, std::size_t stride);

/// Counts of values falling in equal-width bins on [lo, hi); out-of-range values are ignored.
std::vector<double> histogram(std::span<const double> values, double lo, double hi, std::size_t bins);

struct LinearFit {
    double intercept = 0;
    double slope = 0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace boltz
