#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace extval {

/// Ascending order statistics of a sample; values[i] is X_{i+1,n}.
struct OrderedSample {
  std::vector<double> values;

  std::size_t n() const { return values.size(); }
  /// X_{n-k,n} in 1-based order-statistic notation.
  double order_stat_from_top(std::size_t k) const {
    return values[values.size() - 1 - k];
  }
};

/// Stable ascending sort; requires at least two observations.
OrderedSample order_statistics(std::vector<double> sample);

struct HillEstimate {
  double gamma_hat;
  std::size_t k;
  std::size_t n;
  double threshold;  // X_{n-k,n}
};

/// Hill estimator on the top k+1 order statistics:
/// gamma_hat = (1/k) sum_{i=0}^{k-1} log(X_{n-i,n} / X_{n-k,n}).
/// Requires 1 <= k <= n-1 and a strictly positive threshold.
HillEstimate hill(const OrderedSample& ordered, std::size_t k);

struct QuantileEstimate {
  double x_hat;
  double tail_prob;
  double d_n;  // k / (n * tail_prob)
  double gamma_hat_used;
  double threshold;
};

/// Weissman-type extreme quantile estimator:
/// x_hat = X_{n-k,n} * (k/(n p))^{gamma_hat}.
QuantileEstimate weissman_quantile(const OrderedSample& ordered, std::size_t k,
                                   double tail_prob, double gamma_hat);

/// The normal limit N(lambda/(1-rho), gamma^2) of the standardized Hill and
/// quantile errors.
struct LimitLaw {
  double mean;
  double variance;
  double lambda;
  double rho;
  double gamma;

  double sd() const;
};

LimitLaw limit_law(double lambda, double rho, double gamma);

struct Interval {
  double lo;
  double hi;
};

/// Symmetric asymptotic interval gamma_hat +- z_{(1+level)/2} gamma_hat/sqrt(k)
/// (plug-in standard deviation, centering bias assumed away).
Interval hill_confidence_interval(const HillEstimate& estimate, double level);

struct HillPlotPoint {
  std::size_t k;
  double gamma_hat;
  bool ok;
  std::string error;  // set when ok == false
};

/// hill() evaluated per k; invalid entries are reported per row instead of
/// aborting the sweep. Throws on an empty k list.
std::vector<HillPlotPoint> hill_plot(const OrderedSample& ordered,
                                     std::span<const std::size_t> k_values);

}  // namespace extval
