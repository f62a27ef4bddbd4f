#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace extval {

class PathMatrix;

/// L^p norm order: a finite exponent in [1, inf) or the sup norm.
class NormOrder {
 public:
  static NormOrder finite(double p);
  static NormOrder sup() { return NormOrder(std::numeric_limits<double>::infinity()); }

  bool is_sup() const { return std::isinf(p_); }
  double p() const { return p_; }

  std::string to_string() const;
  static NormOrder parse(const std::string& text);

 private:
  explicit NormOrder(double p) : p_(p) {}
  double p_;
};

/// Discretized norm of one path on the left-endpoint grid {j/m}:
///   finite p:  ((1/m) sum_j |y_j|^p)^{1/p}
///   sup:       max_j |y_j|
/// Scaled by the row maximum internally so large heavy-tailed values do not
/// overflow intermediate powers.
double discrete_norm(std::span<const double> path, NormOrder order);

/// Per-row norms of a path matrix. The OpenMP kernel and its serial
/// reference produce bitwise-identical output.
std::vector<double> batch_norms(const PathMatrix& paths, NormOrder order);
std::vector<double> batch_norms_serial(const PathMatrix& paths, NormOrder order);

/// Every factor-th sample of a fine row: the coarse left-endpoint grid
/// {j/m} as a subset of {j/(factor*m)}.
std::vector<double> downsample_row(std::span<const double> fine,
                                   std::size_t factor);

/// Coarse and oracle norms of the same realization. fine.size() must be a
/// multiple of m_coarse so both grids sample the same path.
struct NestedNorms {
  double coarse;
  double oracle;
};
NestedNorms nested_norms(std::span<const double> fine, std::size_t m_coarse,
                         NormOrder order);

/// max_i |X_i - X_hat_i| and its normalized form C_n = max / U(n/k).
struct ApproxErrorReport {
  double max_abs_error;
  double normalized;  // C_n
  std::size_t count;
};

ApproxErrorReport approximation_error(std::span<const double> coarse_norms,
                                      std::span<const double> oracle_norms,
                                      double u_at_n_over_k);

/// The second-order approximation-error rate (1/m)^eta k^gamma n^{gamma'-gamma}
/// together with the sqrt(k)-scaled negligibility proxy.
struct RateBound {
  double bound;
  double sqrt_k_times_bound;
  bool negligible;  // sqrt(k) * bound < threshold
  double threshold;
};

RateBound error_rate_bound(double eta, std::size_t m, std::size_t n,
                           std::size_t k, double gamma, double gamma_prime,
                           double threshold = 0.1);

/// Grid-size threshold m*(n) = n^{(lambda_exp*gamma + eps_prime)/eta} above
/// which the rate product stays bounded when k = floor(n^lambda_exp). Here
/// eta is the usable Holder exponent of the driver (H for Gaussian kinds,
/// with the eps' loss already applied by the caller, so the denominator is
/// eta itself). Requires eta > eps_prime.
double tradeoff_required_m(std::size_t n, double lambda_exp, double gamma,
                           double eta, double eps_prime);

}  // namespace extval
