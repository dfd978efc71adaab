#pragma once

#include <cstdint>
#include <vector>

namespace grtree {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for a binomial proportion; always contains k/n.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963985);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b| (ties handled).
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// One-sample KS distance to the Exponential(rate) distribution.
double ks_to_exponential(std::vector<double> samples, double rate = 1.0);

// 0.5 * sum |p_i - q_i| over aligned outcome vectors.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
};
LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y);

// Two-sided Dvoretzky-Kiefer-Wolfowitz band half-width at confidence 1-alpha.
double dkw_band(std::uint64_t n, double alpha);

// Quantile of a pre-sorted sample (linear interpolation between order stats).
double quantile_sorted(const std::vector<double>& sorted, double q);

double median(std::vector<double> values);

}  // namespace grtree
