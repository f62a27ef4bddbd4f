#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "extval/evt.hpp"
#include "extval/functionals.hpp"
#include "extval/path_gen.hpp"
#include "extval/tail_models.hpp"

namespace extval {

/// Rule for the intermediate sequence k: a fixed count or k = floor(n^lambda).
struct KRule {
  enum class Kind { Fixed, Power };
  Kind kind = Kind::Power;
  std::size_t fixed_k = 0;
  double lambda_exp = 0.5;

  static KRule fixed(std::size_t k);
  static KRule power(double lambda_exp);
  /// The k this rule yields at sample size n; throws unless 1 <= k <= n-1.
  std::size_t resolve(std::size_t n) const;
};

/// Rule for the extreme tail probability: fixed p, 1/n, or c/n.
struct TailProbRule {
  enum class Kind { Fixed, OneOverN, COverN };
  Kind kind = Kind::OneOverN;
  double value = 0.0;  // the fixed p, or the c of c/n

  static TailProbRule fixed(double p);
  static TailProbRule one_over_n();
  static TailProbRule c_over_n(double c);
  double resolve(std::size_t n) const;  // throws unless 0 < p < 1
};

/// What each replication samples: a closed-form heavy-tailed law drawn
/// directly (no discretization; C_n = 0 by construction) or product paths
/// R*Z pushed through a discretized norm at two grid resolutions.
using SampleSource = std::variant<TailModel, ProductSpec>;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an experiment as a whole is unusable (replication failure
/// ceiling breached). Per-replication failures below the ceiling are data,
/// not errors.
class ExperimentFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  SampleSource source = TailModel::pareto(1.0);
  NormOrder norm_order = NormOrder::sup();
  std::size_t n = 1000;
  std::size_t m = 0;         // paths mode: observed grid size
  std::size_t m_oracle = 0;  // paths mode: oracle grid size, multiple of m
  KRule k_rule = KRule::power(0.5);
  TailProbRule tail_prob_rule = TailProbRule::one_over_n();
  std::size_t replications = 100;
  std::uint64_t master_seed = 1;
  double true_gamma = 1.0;
  std::optional<double> true_rho;  // second-order parameter when known
  /// The lambda of sqrt(k) A(n/k) -> lambda. Unset means: direct mode
  /// computes sqrt(k) A(n/k) from the model's closed-form A; paths mode
  /// falls back to 0 (the norm's second-order rate has no closed form).
  std::optional<double> lambda_limit;
  double ci_level = 0.95;
  double negligibility_threshold = 0.1;
  int workers = 0;  // 0 = runtime default; run_experiment honors this

  /// Paths mode only: estimate the true extreme quantile of ||Y|| once per
  /// experiment by a mega-sample of R draws scaled by an independent pool of
  /// ||Z|| norms, reported with an order-statistic confidence band. Off by
  /// default: it adds a fixed per-experiment cost and the per-replication
  /// quantile errors are measured against the oracle-grid estimate anyway.
  bool mc_quantile_reference = false;
  std::size_t mc_quantile_draws = 10'000'000;
  std::size_t mc_quantile_pool = 10'000;

  bool direct_mode() const { return std::holds_alternative<TailModel>(source); }
  const TailModel* direct_model() const { return std::get_if<TailModel>(&source); }
  const ProductSpec* product() const { return std::get_if<ProductSpec>(&source); }

  std::size_t resolved_k() const { return k_rule.resolve(n); }
  double resolved_tail_prob() const { return tail_prob_rule.resolve(n); }
  double resolved_lambda_limit() const;

  void validate() const;  // throws ConfigError on contract violations
  /// Soft diagnostics: intermediate-sequence conditions (np = o(k),
  /// log(np) = o(sqrt(k))) stated as finite-sample checks, KS sample size,
  /// oracle refinement depth.
  std::vector<std::string> lint_warnings() const;
};

struct ReplicationResult {
  std::size_t rep_index = 0;
  bool failed = false;
  std::string failure;

  double gamma_hat = std::numeric_limits<double>::quiet_NaN();
  double gamma_hat_oracle = std::numeric_limits<double>::quiet_NaN();
  double x_hat = std::numeric_limits<double>::quiet_NaN();
  double x_hat_oracle = std::numeric_limits<double>::quiet_NaN();
  double c_n = std::numeric_limits<double>::quiet_NaN();
  double max_abs_err = std::numeric_limits<double>::quiet_NaN();
  double std_gamma_err = std::numeric_limits<double>::quiet_NaN();
  double std_quant_err = std::numeric_limits<double>::quiet_NaN();
  double rel_quantile_err = std::numeric_limits<double>::quiet_NaN();

  double threshold = std::numeric_limits<double>::quiet_NaN();
  double threshold_oracle = std::numeric_limits<double>::quiet_NaN();
  /// K = max|X - Xhat| / oracle threshold; the proof-chain bound
  /// |gamma_hat - gamma_hat_oracle| <= 2 log(4) K applies when K <= 1/2.
  double k_ratio = std::numeric_limits<double>::quiet_NaN();
  bool proof_chain_applicable = false;
  bool proof_chain_ok = true;

  double ci_lo = std::numeric_limits<double>::quiet_NaN();
  double ci_hi = std::numeric_limits<double>::quiet_NaN();
  bool ci_covers = false;
};

struct ExperimentSummary {
  double mean_bias = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double empirical_sd_of_standardized = std::numeric_limits<double>::quiet_NaN();
  double ks_statistic = std::numeric_limits<double>::quiet_NaN();
  double ks_p_value = std::numeric_limits<double>::quiet_NaN();
  double ci_coverage = std::numeric_limits<double>::quiet_NaN();
  double c_n_median = std::numeric_limits<double>::quiet_NaN();
  double c_n_p90 = std::numeric_limits<double>::quiet_NaN();
  std::size_t replication_failures = 0;

  double mean_gamma_hat = std::numeric_limits<double>::quiet_NaN();
  double mean_gamma_hat_oracle = std::numeric_limits<double>::quiet_NaN();
  double max_abs_err_median = std::numeric_limits<double>::quiet_NaN();
  double ks_quantile_statistic = std::numeric_limits<double>::quiet_NaN();
  double ks_quantile_p_value = std::numeric_limits<double>::quiet_NaN();
  double median_rel_quantile_err = std::numeric_limits<double>::quiet_NaN();
  double sd_std_quant_err = std::numeric_limits<double>::quiet_NaN();

  std::size_t usable_replications = 0;
  std::size_t k_used = 0;
  double tail_prob_used = std::numeric_limits<double>::quiet_NaN();
  double d_n = std::numeric_limits<double>::quiet_NaN();
  double lambda_limit_used = std::numeric_limits<double>::quiet_NaN();

  /// Monte Carlo reference quantile of ||Y|| (paths mode with
  /// mc_quantile_reference on); band is a 95% order-statistic bracket.
  double x_p_mc = std::numeric_limits<double>::quiet_NaN();
  double x_p_mc_band_lo = std::numeric_limits<double>::quiet_NaN();
  double x_p_mc_band_hi = std::numeric_limits<double>::quiet_NaN();
  double median_rel_err_vs_mc = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResult {
  ExperimentSummary summary;
  std::vector<ReplicationResult> table;
};

/// One replication, fully determined by (config, rep_index). Estimator
/// failures come back as a failure record, not an exception.
ReplicationResult run_replication(const ExperimentConfig& config,
                                  std::size_t rep_index);

/// B replications in parallel (config.workers), folded into the summary in
/// rep_index order so the result is identical for every worker count.
/// Throws ExperimentFailure when more than 10% of replications fail.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment_serial(const ExperimentConfig& config);

/// One-sample Kolmogorov-Smirnov test of `samples` against the normal law
/// N(reference.mean, reference.variance). Returns (D, asymptotic p-value).
std::pair<double, double> ks_test(std::span<const double> samples,
                                  const LimitLaw& reference);

enum class SweepAxis { M, K, N };

struct SweepCell {
  double axis_value = 0.0;
  bool failed = false;
  std::string error;
  ExperimentResult result;
};

struct SweepResult {
  SweepAxis axis;
  std::vector<SweepCell> cells;
};

/// Independent experiments along one axis; each cell reseeds from
/// (master_seed, axis, value) so cells do not share randomness with each
/// other or with the base experiment. Per-cell failures are recorded and
/// the sweep continues.
SweepResult sweep(const ExperimentConfig& base, SweepAxis axis,
                  std::span<const double> values);

const char* sweep_axis_name(SweepAxis axis);

/// Per-replication table CSV: columns rep_index, gamma_hat,
/// gamma_hat_oracle, x_hat, x_hat_oracle, c_n, std_gamma_err, std_quant_err,
/// failed; values at 17 significant digits.
void write_replication_csv(std::ostream& out, const ExperimentResult& result,
                           const std::string& comment = "");

}  // namespace extval
