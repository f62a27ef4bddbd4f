#include "extval/mc_harness.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <utility>

#include "extval/numfmt.hpp"
#include "extval/stats.hpp"

namespace extval {

KRule KRule::fixed(std::size_t k) {
  if (k == 0) throw ConfigError("fixed k must be positive");
  KRule rule;
  rule.kind = Kind::Fixed;
  rule.fixed_k = k;
  return rule;
}

KRule KRule::power(double lambda_exp) {
  if (!(lambda_exp > 0.0 && lambda_exp < 1.0)) {
    throw ConfigError("k-rule exponent must lie in (0,1)");
  }
  KRule rule;
  rule.kind = Kind::Power;
  rule.lambda_exp = lambda_exp;
  return rule;
}

std::size_t KRule::resolve(std::size_t n) const {
  std::size_t k = fixed_k;
  if (kind == Kind::Power) {
    k = static_cast<std::size_t>(
        std::floor(std::pow(static_cast<double>(n), lambda_exp)));
  }
  if (k < 1 || k > n - 1) {
    throw ConfigError("k rule yields k=" + std::to_string(k) +
                      " outside [1, n-1] at n=" + std::to_string(n));
  }
  return k;
}

TailProbRule TailProbRule::fixed(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("fixed tail_prob must lie in (0,1)");
  }
  TailProbRule rule;
  rule.kind = Kind::Fixed;
  rule.value = p;
  return rule;
}

TailProbRule TailProbRule::one_over_n() {
  TailProbRule rule;
  rule.kind = Kind::OneOverN;
  return rule;
}

TailProbRule TailProbRule::c_over_n(double c) {
  if (!(c > 0.0)) throw ConfigError("tail_prob numerator c must be positive");
  TailProbRule rule;
  rule.kind = Kind::COverN;
  rule.value = c;
  return rule;
}

double TailProbRule::resolve(std::size_t n) const {
  double p = value;
  if (kind == Kind::OneOverN) p = 1.0 / static_cast<double>(n);
  if (kind == Kind::COverN) p = value / static_cast<double>(n);
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("tail_prob rule yields p=" + format_sig12(p) +
                      " outside (0,1) at n=" + std::to_string(n));
  }
  return p;
}

double ExperimentConfig::resolved_lambda_limit() const {
  if (lambda_limit) return *lambda_limit;
  if (const TailModel* model = direct_model()) {
    const std::size_t k = resolved_k();
    const double t = static_cast<double>(n) / static_cast<double>(k);
    return std::sqrt(static_cast<double>(k)) * model->second_order_aux(t);
  }
  return 0.0;
}

void ExperimentConfig::validate() const {
  if (n < 2) throw ConfigError("n must be at least 2");
  if (replications < 1) throw ConfigError("replications must be at least 1");
  if (!(true_gamma > 0.0)) throw ConfigError("true_gamma must be positive");
  if (true_rho && *true_rho > 0.0) {
    throw ConfigError("true_rho must be non-positive");
  }
  if (!(ci_level > 0.0 && ci_level < 1.0)) {
    throw ConfigError("ci_level must lie in (0,1)");
  }
  if (!(negligibility_threshold > 0.0)) {
    throw ConfigError("negligibility_threshold must be positive");
  }
  if (workers < 0) throw ConfigError("workers must be non-negative");
  resolved_k();
  resolved_tail_prob();
  if (!direct_mode()) {
    if (m < 2) throw ConfigError("paths mode requires m >= 2");
    if (m_oracle < m || m_oracle % m != 0) {
      throw ConfigError("m_oracle must be a multiple of m, at least m");
    }
    if (!product()->driver.starts_at_zero()) {
      throw ConfigError("constant driver is excluded from product paths");
    }
    if (mc_quantile_reference &&
        (mc_quantile_draws < 1000 || mc_quantile_pool < 2)) {
      throw ConfigError("mc quantile reference needs >= 1000 draws and a pool of >= 2");
    }
  }
}

std::vector<std::string> ExperimentConfig::lint_warnings() const {
  std::vector<std::string> warnings;
  const std::size_t k = resolved_k();
  const double p = resolved_tail_prob();
  const double np = static_cast<double>(n) * p;
  if (np >= static_cast<double>(k)) {
    warnings.push_back("n*tail_prob = " + format_sig12(np) +
                       " >= k = " + std::to_string(k) +
                       ": outside the regime np = o(k)");
  }
  if (np > 1.0 && std::log(np) >= std::sqrt(static_cast<double>(k))) {
    warnings.push_back("log(n*tail_prob) >= sqrt(k): outside the regime log(np) = o(sqrt(k))");
  }
  if (replications < 100) {
    warnings.push_back("replications < 100: asymptotic KS p-values are unreliable at this size");
  }
  if (!direct_mode()) {
    if (m_oracle < 64 * m) {
      warnings.push_back("m_oracle < 64*m: shallow oracle refinement; oracle norms sit close to coarse norms");
    }
    if (!lambda_limit) {
      warnings.push_back("lambda_limit defaulted to 0: product norms have no closed-form second-order rate");
    }
  }
  return warnings;
}

namespace {

constexpr double kTwoLogFour = 2.0 * 1.3862943611198906;  // 2 log 4

/// Estimators on an indexwise-paired (coarse, oracle) sample. Direct mode
/// passes the same vector twice and skips the second pass.
ReplicationResult estimate_pair(const ExperimentConfig& config,
                                std::size_t rep_index,
                                std::vector<double> coarse,
                                std::vector<double> oracle, bool direct) {
  ReplicationResult rep;
  rep.rep_index = rep_index;

  const std::size_t k = config.resolved_k();
  const double tail_prob = config.resolved_tail_prob();
  const double gamma = config.true_gamma;

  double max_err = 0.0;
  if (!direct) {
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      max_err = std::max(max_err, std::abs(coarse[i] - oracle[i]));
    }
  }
  rep.max_abs_err = max_err;

  const OrderedSample ordered = order_statistics(std::move(coarse));
  const HillEstimate est = hill(ordered, k);
  const QuantileEstimate quant =
      weissman_quantile(ordered, k, tail_prob, est.gamma_hat);

  HillEstimate est_oracle = est;
  QuantileEstimate quant_oracle = quant;
  if (!direct) {
    const OrderedSample ordered_oracle = order_statistics(std::move(oracle));
    est_oracle = hill(ordered_oracle, k);
    quant_oracle =
        weissman_quantile(ordered_oracle, k, tail_prob, est_oracle.gamma_hat);
  }

  rep.gamma_hat = est.gamma_hat;
  rep.gamma_hat_oracle = est_oracle.gamma_hat;
  rep.x_hat = quant.x_hat;
  rep.x_hat_oracle = quant_oracle.x_hat;
  rep.threshold = est.threshold;
  rep.threshold_oracle = est_oracle.threshold;

  // C_n = max|X - Xhat| / U(n/k): closed-form U in direct mode, the oracle
  // threshold as the U(n/k) proxy otherwise (U(n/k)/X_{n-k,n} -> 1).
  rep.k_ratio = max_err / est_oracle.threshold;
  if (direct) {
    const double u =
        config.direct_model()->tail_quantile(static_cast<double>(config.n) /
                                             static_cast<double>(k));
    rep.c_n = max_err / u;
  } else {
    rep.c_n = rep.k_ratio;
  }

  rep.std_gamma_err =
      std::sqrt(static_cast<double>(k)) * (rep.gamma_hat - gamma) / gamma;

  double x_ref = rep.x_hat_oracle;
  if (direct) {
    x_ref = config.direct_model()->tail_quantile(1.0 / tail_prob);
  }
  rep.rel_quantile_err = std::abs(rep.x_hat / x_ref - 1.0);
  const double log_dn = std::log(quant.d_n);
  if (log_dn != 0.0) {
    rep.std_quant_err = std::sqrt(static_cast<double>(k)) / log_dn *
                        (rep.x_hat / x_ref - 1.0) / gamma;
  }

  rep.proof_chain_applicable = rep.k_ratio <= 0.5;
  if (rep.proof_chain_applicable) {
    rep.proof_chain_ok = std::abs(rep.gamma_hat - rep.gamma_hat_oracle) <=
                         kTwoLogFour * rep.k_ratio;
  }

  const Interval ci = hill_confidence_interval(est, config.ci_level);
  rep.ci_lo = ci.lo;
  rep.ci_hi = ci.hi;
  rep.ci_covers = ci.lo <= gamma && gamma <= ci.hi;
  return rep;
}

ReplicationResult run_replication_impl(const ExperimentConfig& config,
                                       std::size_t rep_index,
                                       const DriverSimulator* sim) {
  try {
    const RandomStream rep_stream = RandomStream(config.master_seed)
                                        .fork(stream_tag::kReplication)
                                        .fork(rep_index);
    if (const TailModel* model = config.direct_model()) {
      RandomStream draw = rep_stream.fork(stream_tag::kDirectSample);
      std::vector<double> sample = model->sample(draw, config.n);
      std::vector<double> oracle = sample;
      return estimate_pair(config, rep_index, std::move(sample),
                           std::move(oracle), true);
    }

    const ProductSpec& prod = *config.product();
    std::optional<DriverSimulator> local_sim;
    if (sim == nullptr) {
      local_sim.emplace(prod.driver, config.m_oracle);
      sim = &*local_sim;
    }
    std::vector<double> coarse(config.n);
    std::vector<double> oracle(config.n);
    std::vector<double> fine_row(config.m_oracle);
    for (std::size_t i = 0; i < config.n; ++i) {
      const RandomStream row_base = rep_stream.fork(i);
      RandomStream mult_stream = row_base.fork(stream_tag::kMultiplier);
      const double r = sample_multiplier(prod.multiplier, mult_stream);
      RandomStream driver_stream = row_base.fork(stream_tag::kDriver);
      sim->fill_row(driver_stream, fine_row);
      for (double& y : fine_row) y *= r;
      const NestedNorms norms =
          nested_norms(fine_row, config.m, config.norm_order);
      coarse[i] = norms.coarse;
      oracle[i] = norms.oracle;
    }
    return estimate_pair(config, rep_index, std::move(coarse),
                         std::move(oracle), false);
  } catch (const std::exception& e) {
    ReplicationResult rep;
    rep.rep_index = rep_index;
    rep.failed = true;
    rep.failure = e.what();
    return rep;
  }
}

/// Mega-sample reference for the extreme quantile of ||Y||: R draws scaled
/// by a resampled pool of ||Z|| norms, all from the dedicated reference
/// substream. Returns (quantile, band_lo, band_hi).
struct McQuantile {
  double value;
  double lo;
  double hi;
};

McQuantile compute_mc_quantile(const ExperimentConfig& config,
                               const DriverSimulator& sim) {
  const ProductSpec& prod = *config.product();
  const RandomStream base =
      RandomStream(config.master_seed).fork(stream_tag::kQuantileReference);

  std::vector<double> pool(config.mc_quantile_pool);
  const std::ptrdiff_t pool_size =
      static_cast<std::ptrdiff_t>(config.mc_quantile_pool);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < pool_size; ++i) {
    std::vector<double> row(config.m_oracle);
    RandomStream driver_stream =
        base.fork(stream_tag::kDriver).fork(static_cast<std::size_t>(i));
    sim.fill_row(driver_stream, row);
    pool[static_cast<std::size_t>(i)] = discrete_norm(row, config.norm_order);
  }

  const std::size_t draws = config.mc_quantile_draws;
  std::vector<double> products(draws);
  RandomStream mult_stream = base.fork(stream_tag::kMultiplier);
  for (std::size_t j = 0; j < draws; ++j) {
    const double r = sample_multiplier(prod.multiplier, mult_stream);
    const std::size_t idx =
        static_cast<std::size_t>(mult_stream.next_u64() % pool.size());
    products[j] = r * pool[idx];
  }
  std::sort(products.begin(), products.end());

  const double p = config.resolved_tail_prob();
  const double nd = static_cast<double>(draws);
  const auto rank_at = [&](double target) {
    const double clamped = std::clamp(target, 0.0, nd - 1.0);
    return static_cast<std::size_t>(clamped);
  };
  // 95% order-statistic bracket around the (1-p) empirical quantile.
  const double center = (1.0 - p) * nd;
  const double spread = 1.959963984540054 * std::sqrt(nd * p * (1.0 - p));
  McQuantile out;
  out.value = products[rank_at(center)];
  out.lo = products[rank_at(center - spread)];
  out.hi = products[rank_at(center + spread)];
  return out;
}

ExperimentResult run_experiment_impl(const ExperimentConfig& config,
                                     bool parallel) {
  config.validate();

  std::optional<DriverSimulator> sim;
  if (const ProductSpec* prod = config.product()) {
    sim.emplace(prod->driver, config.m_oracle);
  }
  const DriverSimulator* sim_ptr = sim ? &*sim : nullptr;

  int threads = config.workers;
#ifdef _OPENMP
  if (threads <= 0) threads = omp_get_max_threads();
#else
  threads = 1;
#endif

  ExperimentResult out;
  out.table.resize(config.replications);
  const std::ptrdiff_t reps = static_cast<std::ptrdiff_t>(config.replications);
#pragma omp parallel for schedule(static) num_threads(threads) if (parallel)
  for (std::ptrdiff_t r = 0; r < reps; ++r) {
    out.table[static_cast<std::size_t>(r)] =
        run_replication_impl(config, static_cast<std::size_t>(r), sim_ptr);
  }

  // Deterministic fold in rep_index order (the table is already index
  // ordered regardless of scheduling).
  ExperimentSummary& summary = out.summary;
  const double gamma = config.true_gamma;
  std::vector<double> gammas, gammas_oracle, std_errs, c_ns, max_errs;
  std::vector<double> quant_errs, rel_qerrs;
  std::size_t covered = 0;
  std::string first_failure;
  for (const ReplicationResult& rep : out.table) {
    if (rep.failed) {
      ++summary.replication_failures;
      if (first_failure.empty()) first_failure = rep.failure;
      continue;
    }
    gammas.push_back(rep.gamma_hat);
    gammas_oracle.push_back(rep.gamma_hat_oracle);
    std_errs.push_back(rep.std_gamma_err);
    c_ns.push_back(rep.c_n);
    max_errs.push_back(rep.max_abs_err);
    if (std::isfinite(rep.std_quant_err)) quant_errs.push_back(rep.std_quant_err);
    if (std::isfinite(rep.rel_quantile_err)) rel_qerrs.push_back(rep.rel_quantile_err);
    if (rep.ci_covers) ++covered;
  }
  summary.usable_replications = gammas.size();
  summary.k_used = config.resolved_k();
  summary.tail_prob_used = config.resolved_tail_prob();
  summary.d_n = static_cast<double>(summary.k_used) /
                (static_cast<double>(config.n) * summary.tail_prob_used);
  summary.lambda_limit_used = config.resolved_lambda_limit();

  if (summary.replication_failures * 10 > config.replications) {
    throw ExperimentFailure(
        "replication failure ceiling breached: " +
        std::to_string(summary.replication_failures) + " of " +
        std::to_string(config.replications) +
        " replications failed (> 10%); first failure: " + first_failure);
  }

  if (!gammas.empty()) {
    const std::size_t usable = gammas.size();
    summary.mean_gamma_hat = mean(gammas);
    summary.mean_gamma_hat_oracle = mean(gammas_oracle);
    summary.mean_bias = summary.mean_gamma_hat - gamma;
    double sq = 0.0;
    for (double g : gammas) sq += (g - gamma) * (g - gamma);
    summary.rmse = std::sqrt(sq / static_cast<double>(usable));
    if (usable >= 2) {
      summary.empirical_sd_of_standardized = sample_sd(std_errs);
    }
    const double rho = config.true_rho.value_or(0.0);
    const double lam = summary.lambda_limit_used;
    // std_gamma_err is standardized by gamma, so its limit is
    // N(lambda/((1-rho) gamma), 1): the law of (lambda/gamma, rho, 1).
    const auto [dg, pg] = ks_test(std_errs, limit_law(lam / gamma, rho, 1.0));
    summary.ks_statistic = dg;
    summary.ks_p_value = pg;
    summary.ci_coverage =
        static_cast<double>(covered) / static_cast<double>(usable);
    summary.c_n_median = quantile(c_ns, 0.5);
    summary.c_n_p90 = quantile(c_ns, 0.9);
    summary.max_abs_err_median = quantile(max_errs, 0.5);
    if (!quant_errs.empty()) {
      // Same standardization as std_gamma_err, hence the same limit law.
      const auto [dq, pq] = ks_test(quant_errs, limit_law(lam / gamma, rho, 1.0));
      summary.ks_quantile_statistic = dq;
      summary.ks_quantile_p_value = pq;
      if (quant_errs.size() >= 2) {
        summary.sd_std_quant_err = sample_sd(quant_errs);
      }
    }
    if (!rel_qerrs.empty()) {
      summary.median_rel_quantile_err = quantile(rel_qerrs, 0.5);
    }
  }

  if (config.mc_quantile_reference && sim_ptr != nullptr) {
    const McQuantile ref = compute_mc_quantile(config, *sim_ptr);
    summary.x_p_mc = ref.value;
    summary.x_p_mc_band_lo = ref.lo;
    summary.x_p_mc_band_hi = ref.hi;
    std::vector<double> rel_vs_mc;
    rel_vs_mc.reserve(out.table.size());
    for (const ReplicationResult& rep : out.table) {
      if (rep.failed || !std::isfinite(rep.x_hat)) continue;
      rel_vs_mc.push_back(std::abs(rep.x_hat / ref.value - 1.0));
    }
    if (!rel_vs_mc.empty()) {
      summary.median_rel_err_vs_mc = quantile(rel_vs_mc, 0.5);
    }
  }

  return out;
}

}  // namespace

ReplicationResult run_replication(const ExperimentConfig& config,
                                  std::size_t rep_index) {
  config.validate();
  if (rep_index >= config.replications) {
    throw ConfigError("rep_index out of range");
  }
  return run_replication_impl(config, rep_index, nullptr);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  return run_experiment_impl(config, true);
}

ExperimentResult run_experiment_serial(const ExperimentConfig& config) {
  return run_experiment_impl(config, false);
}

std::pair<double, double> ks_test(std::span<const double> samples,
                                  const LimitLaw& reference) {
  if (samples.empty()) throw std::invalid_argument("KS test needs a nonempty sample");
  if (!(reference.variance > 0.0)) {
    throw std::invalid_argument("KS reference variance must be positive");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = reference.sd();
  const double count = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf((sorted[i] - reference.mean) / sd);
    d = std::max(d, f - static_cast<double>(i) / count);
    d = std::max(d, static_cast<double>(i + 1) / count - f);
  }
  return {d, kolmogorov_survival(std::sqrt(count) * d)};
}

const char* sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::M: return "m";
    case SweepAxis::K: return "k";
    case SweepAxis::N: return "n";
  }
  return "?";
}

namespace {

std::uint64_t integral_axis_value(SweepAxis axis, double value) {
  if (!(value >= 1.0) || value != std::floor(value)) {
    throw ConfigError(std::string("sweep axis ") + sweep_axis_name(axis) +
                      " needs positive integer values, got " +
                      format_sig12(value));
  }
  return static_cast<std::uint64_t>(value);
}

void apply_axis(ExperimentConfig& config, SweepAxis axis, double value) {
  const std::uint64_t v = integral_axis_value(axis, value);
  switch (axis) {
    case SweepAxis::M:
      if (config.direct_mode()) {
        throw ConfigError("sweep axis m requires a paths-mode config");
      }
      config.m = static_cast<std::size_t>(v);
      break;
    case SweepAxis::K:
      config.k_rule = KRule::fixed(static_cast<std::size_t>(v));
      break;
    case SweepAxis::N:
      config.n = static_cast<std::size_t>(v);
      break;
  }
}

}  // namespace

SweepResult sweep(const ExperimentConfig& base, SweepAxis axis,
                  std::span<const double> values) {
  if (values.empty()) throw ConfigError("sweep needs at least one axis value");
  SweepResult out;
  out.axis = axis;
  out.cells.reserve(values.size());
  for (const double value : values) {
    SweepCell cell;
    cell.axis_value = value;
    try {
      ExperimentConfig config = base;
      apply_axis(config, axis, value);
      config.master_seed = RandomStream(base.master_seed)
                               .fork(stream_tag::kSweepAxis)
                               .fork(static_cast<std::uint64_t>(axis))
                               .fork(integral_axis_value(axis, value))
                               .next_u64();
      cell.result = run_experiment(config);
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
    out.cells.push_back(std::move(cell));
  }
  return out;
}

void write_replication_csv(std::ostream& out, const ExperimentResult& result,
                           const std::string& comment) {
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
  }
  out << "rep_index,gamma_hat,gamma_hat_oracle,x_hat,x_hat_oracle,c_n,"
         "std_gamma_err,std_quant_err,failed\n";
  for (const ReplicationResult& rep : result.table) {
    out << rep.rep_index << ',' << format_sig17(rep.gamma_hat) << ','
        << format_sig17(rep.gamma_hat_oracle) << ','
        << format_sig17(rep.x_hat) << ',' << format_sig17(rep.x_hat_oracle)
        << ',' << format_sig17(rep.c_n) << ','
        << format_sig17(rep.std_gamma_err) << ','
        << format_sig17(rep.std_quant_err) << ',' << (rep.failed ? 1 : 0)
        << '\n';
  }
  if (!out) throw std::runtime_error("replication table write failed");
}

}  // namespace extval
