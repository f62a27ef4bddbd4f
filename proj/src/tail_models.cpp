#include "extval/tail_models.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace extval {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be a positive finite real, got " << v;
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

TailModel::TailModel(TailFamily family, double gamma, std::optional<double> rho,
                     double tau, double lambda_shape, double scale)
    : family_(family),
      gamma_(gamma),
      rho_(rho),
      tau_(tau),
      lambda_shape_(lambda_shape),
      scale_(scale) {
  require_positive(gamma_, "gamma");
  require_positive(scale_, "scale");
  if (rho_ && *rho_ > 0.0)
    throw std::invalid_argument("rho must be non-positive");
}

TailModel TailModel::pareto(double gamma, double scale) {
  return TailModel(TailFamily::Pareto, gamma, std::nullopt, 0.0, 0.0, scale);
}

TailModel TailModel::frechet(double gamma, double scale) {
  // rho = -1 follows from the expansion of U; see second_order_aux below.
  return TailModel(TailFamily::Frechet, gamma, -1.0, 0.0, 0.0, scale);
}

TailModel TailModel::burr(double tau, double lambda_shape, double scale) {
  require_positive(tau, "tau");
  require_positive(lambda_shape, "lambda_shape");
  return TailModel(TailFamily::Burr, 1.0 / (tau * lambda_shape),
                   -1.0 / lambda_shape, tau, lambda_shape, scale);
}

double TailModel::tail_quantile(double t) const {
  if (!(t > 1.0))
    throw std::domain_error("tail_quantile: t must be > 1");
  switch (family_) {
    case TailFamily::Pareto:
      return scale_ * std::pow(t, gamma_);
    case TailFamily::Frechet:
      return scale_ * std::pow(-std::log1p(-1.0 / t), -gamma_);
    case TailFamily::Burr:
      return scale_ * std::pow(std::pow(t, 1.0 / lambda_shape_) - 1.0,
                               1.0 / tau_);
  }
  throw std::logic_error("tail_quantile: unreachable");
}

double TailModel::second_order_aux(double t) const {
  if (!(t > 1.0))
    throw std::domain_error("second_order_aux: t must be > 1");
  switch (family_) {
    case TailFamily::Pareto:
      // Exact power law: U(tx)/U(t) = x^gamma with no error term.
      return 0.0;
    case TailFamily::Frechet: {
      // With s = 1/t, -log(1-s) = s (1 + s/2 + s^2/3 + ...), so
      //   U(t) = t^gamma (1 + 1/(2t) + O(t^-2))^{-gamma}
      //        = t^gamma (1 - gamma/(2t) + O(t^-2)),
      // and U(tx)/U(t) - x^gamma = x^gamma (gamma/(2t))(1 - 1/x) + O(t^-2),
      // which is the second-order form with rho = -1, A(t) = gamma/(2t).
      return gamma_ / (2.0 * t);
    }
    case TailFamily::Burr: {
      // U(t) = t^gamma (1 - t^rho)^{1/tau}; first-order expansion of the
      // ratio gives A(t) = (-rho/tau) t^rho.
      const double rho = *rho_;
      return (-rho / tau_) * std::pow(t, rho);
    }
  }
  throw std::logic_error("second_order_aux: unreachable");
}

double TailModel::cdf(double x) const {
  const double z = x / scale_;
  switch (family_) {
    case TailFamily::Pareto:
      return z <= 1.0 ? 0.0 : 1.0 - std::pow(z, -1.0 / gamma_);
    case TailFamily::Frechet:
      return z <= 0.0 ? 0.0 : std::exp(-std::pow(z, -1.0 / gamma_));
    case TailFamily::Burr:
      return z <= 0.0
                 ? 0.0
                 : 1.0 - std::pow(1.0 + std::pow(z, tau_), -lambda_shape_);
  }
  throw std::logic_error("cdf: unreachable");
}

double TailModel::quantile_from_uniform(double v) const {
  if (!(v > 0.0 && v < 1.0))
    throw std::domain_error("quantile_from_uniform: v must lie in (0,1)");
  return tail_quantile(1.0 / v);
}

std::vector<double> TailModel::sample(RandomStream& rng,
                                      std::size_t count) const {
  if (count == 0) throw std::invalid_argument("sample: count must be >= 1");
  std::vector<double> out(count);
  for (auto& x : out) x = quantile_from_uniform(rng.uniform01());
  return out;
}

std::string TailModel::describe() const {
  std::ostringstream os;
  switch (family_) {
    case TailFamily::Pareto:
      os << "Pareto(gamma=" << gamma_;
      break;
    case TailFamily::Frechet:
      os << "Frechet(gamma=" << gamma_;
      break;
    case TailFamily::Burr:
      os << "Burr(tau=" << tau_ << ", lambda=" << lambda_shape_
         << "; gamma=" << gamma_ << ", rho=" << *rho_;
      break;
  }
  if (scale_ != 1.0) os << ", scale=" << scale_;
  os << ")";
  return os.str();
}

}  // namespace extval
