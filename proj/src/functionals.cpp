#include "extval/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "extval/path_gen.hpp"

namespace extval {

NormOrder NormOrder::finite(double p) {
  if (!(p >= 1.0) || std::isinf(p)) {
    throw std::invalid_argument("norm order must satisfy p >= 1 and be finite");
  }
  return NormOrder(p);
}

std::string NormOrder::to_string() const {
  if (is_sup()) return "inf";
  // Integral orders print without a trailing ".000000".
  if (p_ == std::floor(p_) && p_ < 1e15) {
    return std::to_string(static_cast<long long>(p_));
  }
  return std::to_string(p_);
}

NormOrder NormOrder::parse(const std::string& text) {
  if (text == "inf" || text == "sup" || text == "max") return sup();
  std::size_t pos = 0;
  double p = std::stod(text, &pos);
  if (pos != text.size()) {
    throw std::invalid_argument("unparsable norm order: " + text);
  }
  return finite(p);
}

double discrete_norm(std::span<const double> path, NormOrder order) {
  if (path.empty()) throw std::invalid_argument("empty path");
  double peak = 0.0;
  for (double y : path) peak = std::max(peak, std::abs(y));
  if (order.is_sup() || peak == 0.0) return peak;

  // Factoring out the peak keeps |y|^p in [0,1]; heavy-tailed rows would
  // otherwise overflow for large p.
  const double p = order.p();
  double acc = 0.0;
  for (double y : path) acc += std::pow(std::abs(y) / peak, p);
  return peak * std::pow(acc / static_cast<double>(path.size()), 1.0 / p);
}

std::vector<double> batch_norms_serial(const PathMatrix& paths,
                                       NormOrder order) {
  std::vector<double> out(paths.rows());
  for (std::size_t i = 0; i < paths.rows(); ++i) {
    out[i] = discrete_norm(paths.row(i), order);
  }
  return out;
}

std::vector<double> batch_norms(const PathMatrix& paths, NormOrder order) {
  std::vector<double> out(paths.rows());
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(paths.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    out[static_cast<std::size_t>(i)] =
        discrete_norm(paths.row(static_cast<std::size_t>(i)), order);
  }
  return out;
}

std::vector<double> downsample_row(std::span<const double> fine,
                                   std::size_t factor) {
  if (factor == 0 || fine.size() % factor != 0) {
    throw std::invalid_argument("fine grid size must be a multiple of the downsampling factor");
  }
  std::vector<double> coarse(fine.size() / factor);
  for (std::size_t j = 0; j < coarse.size(); ++j) coarse[j] = fine[j * factor];
  return coarse;
}

NestedNorms nested_norms(std::span<const double> fine, std::size_t m_coarse,
                         NormOrder order) {
  if (m_coarse == 0 || fine.size() % m_coarse != 0) {
    throw std::invalid_argument("oracle grid size must be a multiple of the coarse grid size");
  }
  NestedNorms out;
  out.oracle = discrete_norm(fine, order);
  std::vector<double> coarse = downsample_row(fine, fine.size() / m_coarse);
  out.coarse = discrete_norm(coarse, order);
  return out;
}

ApproxErrorReport approximation_error(std::span<const double> coarse_norms,
                                      std::span<const double> oracle_norms,
                                      double u_at_n_over_k) {
  if (coarse_norms.size() != oracle_norms.size() || coarse_norms.empty()) {
    throw std::invalid_argument("norm vectors must be non-empty and of equal length");
  }
  if (!(u_at_n_over_k > 0.0)) {
    throw std::invalid_argument("normalizing quantile U(n/k) must be positive");
  }
  ApproxErrorReport report;
  report.count = coarse_norms.size();
  report.max_abs_error = 0.0;
  for (std::size_t i = 0; i < coarse_norms.size(); ++i) {
    report.max_abs_error = std::max(
        report.max_abs_error, std::abs(coarse_norms[i] - oracle_norms[i]));
  }
  report.normalized = report.max_abs_error / u_at_n_over_k;
  return report;
}

RateBound error_rate_bound(double eta, std::size_t m, std::size_t n,
                           std::size_t k, double gamma, double gamma_prime,
                           double threshold) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (m == 0 || n == 0 || k == 0) {
    throw std::invalid_argument("m, n, k must be positive");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");

  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);

  RateBound out;
  out.bound = std::pow(1.0 / md, eta) * std::pow(kd, gamma) *
              std::pow(nd, gamma_prime - gamma);
  out.sqrt_k_times_bound = std::sqrt(kd) * out.bound;
  out.threshold = threshold;
  out.negligible = out.sqrt_k_times_bound < threshold;
  return out;
}

double tradeoff_required_m(std::size_t n, double lambda_exp, double gamma,
                           double eta, double eps_prime) {
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  if (!(lambda_exp > 0.0 && lambda_exp < 1.0)) {
    throw std::invalid_argument("k-rule exponent must lie in (0,1)");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(eps_prime >= 0.0)) throw std::invalid_argument("eps_prime must be non-negative");
  if (!(eta > eps_prime)) {
    throw std::invalid_argument("usable Holder exponent must exceed eps_prime");
  }
  const double exponent = (lambda_exp * gamma + eps_prime) / eta;
  return std::pow(static_cast<double>(n), exponent);
}

}  // namespace extval
