#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "extval/rng.hpp"

namespace extval {

enum class TailFamily { Pareto, Frechet, Burr };

/// Heavy-tailed law with a closed-form tail quantile function
/// U(t) = F^{-1}(1 - 1/t) that is regularly varying with index gamma > 0.
/// Where the second-order behaviour is known in closed form, the auxiliary
/// rate function A(t) of the second-order condition is exposed as well:
///
///   Pareto   U(t) = c t^gamma                      A == 0 (exact power law)
///   Frechet  U(t) = c (-log(1 - 1/t))^{-gamma}     rho = -1, A(t) = gamma/(2t)
///   Burr     U(t) = c (t^{1/lambda} - 1)^{1/tau}   rho = -1/lambda,
///                                                  A(t) = (-rho/tau) t^rho
///            with gamma = 1/(tau*lambda).
class TailModel {
 public:
  static TailModel pareto(double gamma, double scale = 1.0);
  static TailModel frechet(double gamma, double scale = 1.0);
  static TailModel burr(double tau, double lambda_shape, double scale = 1.0);

  TailFamily family() const { return family_; }
  double gamma() const { return gamma_; }
  std::optional<double> rho() const { return rho_; }
  double scale() const { return scale_; }
  double tau() const { return tau_; }                  // Burr only, else 0
  double lambda_shape() const { return lambda_shape_; }  // Burr only, else 0

  /// U(t) for t > 1; throws std::domain_error otherwise.
  double tail_quantile(double t) const;

  /// A(t) for t > 1; throws std::domain_error when the family has no
  /// derived auxiliary function.
  double second_order_aux(double t) const;

  /// Closed-form CDF F(x) on the support (used by the inverse-transform
  /// checks and by direct-mode experiments).
  double cdf(double x) const;

  /// Inverse-transform kernel: U(1/v) for v in (0,1). sample() feeds it
  /// uniform draws; tests feed it pinned values.
  double quantile_from_uniform(double v) const;

  /// count i.i.d. draws X = U(1/V), V uniform on (0,1).
  std::vector<double> sample(RandomStream& rng, std::size_t count) const;

  std::string describe() const;

 private:
  TailModel(TailFamily family, double gamma, std::optional<double> rho,
            double tau, double lambda_shape, double scale);

  TailFamily family_;
  double gamma_;
  std::optional<double> rho_;
  double tau_ = 0.0;           // Burr only
  double lambda_shape_ = 0.0;  // Burr only
  double scale_;
};

}  // namespace extval
