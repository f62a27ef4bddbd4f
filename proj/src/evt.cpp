#include "extval/evt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "extval/stats.hpp"

namespace extval {

OrderedSample order_statistics(std::vector<double> sample) {
  if (sample.size() < 2)
    throw std::invalid_argument("order_statistics: need at least 2 values");
  std::stable_sort(sample.begin(), sample.end());
  return OrderedSample{std::move(sample)};
}

HillEstimate hill(const OrderedSample& ordered, std::size_t k) {
  const std::size_t n = ordered.n();
  if (k < 1 || k > n - 1)
    throw std::invalid_argument("hill: k must satisfy 1 <= k <= n-1");
  const double threshold = ordered.order_stat_from_top(k);
  if (!(threshold > 0.0))
    throw std::invalid_argument(
        "hill: non-positive threshold X_{n-k,n}; log-ratios undefined");
  if (!std::isfinite(ordered.order_stat_from_top(0)))
    throw std::invalid_argument(
        "hill: non-finite value among the top k order statistics");
  const double log_threshold = std::log(threshold);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    sum += std::log(ordered.order_stat_from_top(i)) - log_threshold;
  return HillEstimate{sum / static_cast<double>(k), k, n, threshold};
}

QuantileEstimate weissman_quantile(const OrderedSample& ordered, std::size_t k,
                                   double tail_prob, double gamma_hat) {
  const std::size_t n = ordered.n();
  if (k < 1 || k > n - 1)
    throw std::invalid_argument("weissman_quantile: k must satisfy 1 <= k <= n-1");
  if (!(tail_prob > 0.0 && tail_prob < 1.0))
    throw std::invalid_argument("weissman_quantile: tail_prob must lie in (0,1)");
  const double threshold = ordered.order_stat_from_top(k);
  if (!(threshold > 0.0))
    throw std::invalid_argument("weissman_quantile: non-positive threshold");
  const double d_n =
      static_cast<double>(k) / (static_cast<double>(n) * tail_prob);
  return QuantileEstimate{threshold * std::pow(d_n, gamma_hat), tail_prob, d_n,
                          gamma_hat, threshold};
}

double LimitLaw::sd() const { return std::sqrt(variance); }

LimitLaw limit_law(double lambda, double rho, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("limit_law: gamma must be > 0");
  if (rho > 0.0) throw std::invalid_argument("limit_law: rho must be <= 0");
  return LimitLaw{lambda / (1.0 - rho), gamma * gamma, lambda, rho, gamma};
}

Interval hill_confidence_interval(const HillEstimate& estimate, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("hill_confidence_interval: level must lie in (0,1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double half_width =
      z * estimate.gamma_hat / std::sqrt(static_cast<double>(estimate.k));
  return Interval{estimate.gamma_hat - half_width,
                  estimate.gamma_hat + half_width};
}

std::vector<HillPlotPoint> hill_plot(const OrderedSample& ordered,
                                     std::span<const std::size_t> k_values) {
  if (k_values.empty())
    throw std::invalid_argument("hill_plot: empty k list");
  std::vector<HillPlotPoint> rows;
  rows.reserve(k_values.size());
  for (std::size_t k : k_values) {
    try {
      rows.push_back({k, hill(ordered, k).gamma_hat, true, {}});
    } catch (const std::exception& e) {
      rows.push_back({k, std::numeric_limits<double>::quiet_NaN(), false,
                      e.what()});
    }
  }
  return rows;
}

}  // namespace extval
