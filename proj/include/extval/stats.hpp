#pragma once

#include <span>

namespace extval {

/// Inverse of the standard normal CDF. Wichura's algorithm AS 241 (PPND16),
/// absolute error below 1e-15 on (0,1). Throws std::domain_error outside (0,1).
double normal_quantile(double p);

/// Standard normal CDF, computed from erfc.
double normal_cdf(double x);

/// Survival function Q(t) = P(K > t) of the asymptotic Kolmogorov law,
/// Q(t) = 2 * sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2), truncated at 100 terms
/// and clamped to [0,1].
double kolmogorov_survival(double t);

/// Sample mean; throws on empty input.
double mean(std::span<const double> xs);

/// Sample standard deviation with the n-1 denominator; needs >= 2 points.
double sample_sd(std::span<const double> xs);

/// Nearest-rank quantile of an unsorted sample (copied and sorted inside).
double quantile(std::span<const double> xs, double q);

/// Pearson correlation of paired samples.
double correlation(std::span<const double> xs, std::span<const double> ys);

/// Slope of the least-squares line y = a + b x.
double ols_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace extval
