#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "extval/rng.hpp"
#include "extval/tail_models.hpp"

namespace extval {

enum class ProcessKind {
  BrownianMotion,
  FractionalBrownianMotion,
  DeterministicRamp,
  DeterministicConstant,
};

enum class FbmMethod { CirculantEmbedding, DenseCholesky };

/// A driver process Z on [0,1], observed at the left endpoints j/m. All
/// random kinds start at Z(0) = 0; the constant kind does not and is
/// therefore rejected as a product driver.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::BrownianMotion;
  double hurst = 0.5;  // fractional Brownian motion only
  FbmMethod method = FbmMethod::CirculantEmbedding;
  double constant_level = 1.0;  // constant kind only
  /// Usable Holder exponent eta of the sample paths; defaults to the a.s.
  /// critical exponent of the kind (H for (f)Bm, 1 for the deterministic
  /// kinds). Callers subtract their eps' slack where a strict-Holder
  /// exponent is required.
  double holder_exponent = 0.5;

  static ProcessSpec brownian();
  static ProcessSpec fractional_brownian(
      double hurst, FbmMethod method = FbmMethod::CirculantEmbedding);
  static ProcessSpec ramp();
  static ProcessSpec constant(double level);

  bool is_random() const;
  bool starts_at_zero() const { return kind != ProcessKind::DeterministicConstant; }
  /// Which moment orders the increment criterion E|Z(t)-Z(s)|^kappa <= c|t-s|^{1+beta}
  /// can be satisfied for.
  std::string moment_order_bound() const;
  std::string describe() const;
};

/// Multiplier R of a product path Y = R*Z: either a heavy-tailed model or a
/// fixed positive constant (testing affordance; consumes no randomness).
using MultiplierSpec = std::variant<TailModel, double>;

double sample_multiplier(const MultiplierSpec& spec, RandomStream& stream);
std::string describe_multiplier(const MultiplierSpec& spec);

struct ProductSpec {
  MultiplierSpec multiplier = 1.0;
  ProcessSpec driver;
};

/// n paths by m grid values, entry (i,j) = Y_i(j/m), row-major.
class PathMatrix {
 public:
  PathMatrix(std::size_t n_paths, std::size_t grid_size);

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return m_; }
  std::span<double> row(std::size_t i) {
    return {values_.data() + i * m_, m_};
  }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * m_, m_};
  }

  /// CSV layout: optional '#'-prefixed comment lines, a header line "m,n",
  /// then one comma-separated row per path. Values carry 17 significant
  /// digits so the matrix round-trips bit for bit.
  void write_csv(std::ostream& out, const std::string& comment = "") const;
  static PathMatrix read_csv(std::istream& in);

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<double> values_;
};

/// Row generator for a fixed (spec, m). Construction does the one-time
/// synthesis setup (circulant spectrum or dense Cholesky factor); it is not
/// thread-safe and must happen outside parallel regions. fill_row is safe to
/// call concurrently with distinct streams and rows.
class DriverSimulator {
 public:
  DriverSimulator(const ProcessSpec& spec, std::size_t m);
  ~DriverSimulator();
  DriverSimulator(const DriverSimulator&) = delete;
  DriverSimulator& operator=(const DriverSimulator&) = delete;

  const ProcessSpec& spec() const { return spec_; }
  std::size_t grid_size() const { return m_; }

  /// Writes one path of Z onto row (length m). Consumes a fixed number of
  /// draws from the stream determined by (spec, m) alone.
  void fill_row(RandomStream& stream, std::span<double> row) const;

 private:
  void setup_circulant();
  void setup_cholesky();
  void fill_brownian(RandomStream& stream, std::span<double> row) const;
  void fill_fbm_circulant(RandomStream& stream, std::span<double> row) const;
  void fill_fbm_cholesky(RandomStream& stream, std::span<double> row) const;

  ProcessSpec spec_;
  std::size_t m_;
  double increment_scale_ = 1.0;  // m^{-H}: self-similar rescale to spacing 1/m
  // Circulant embedding state: sqrt of the spectrum of the 2(m-1) circulant.
  std::vector<double> sqrt_eigenvalues_;
  std::size_t embed_size_ = 0;
  void* plan_ = nullptr;  // fftw_plan
  // Dense fallback state: lower-triangular Cholesky factor of the fGn
  // covariance, row-major (m-1) x (m-1).
  std::vector<double> chol_;
};

/// n independent driver paths; row i draws from rng.fork(i).fork(kDriver).
PathMatrix simulate_driver(const ProcessSpec& spec, std::size_t m,
                           std::size_t n, const RandomStream& rng);
PathMatrix simulate_driver_serial(const ProcessSpec& spec, std::size_t m,
                                  std::size_t n, const RandomStream& rng);

/// Product paths Y_i = R_i * Z_i; R_i draws from rng.fork(i).fork(kMultiplier)
/// and Z_i from rng.fork(i).fork(kDriver), so a fixed multiplier of 1
/// reproduces simulate_driver exactly.
PathMatrix simulate_product(const ProductSpec& spec, std::size_t m,
                            std::size_t n, const RandomStream& rng);
PathMatrix simulate_product_serial(const ProductSpec& spec, std::size_t m,
                                   std::size_t n, const RandomStream& rng);

/// max over grid pairs j < j' of |y(j'/m) - y(j/m)| / ((j'-j)/m)^eta, a
/// grid lower bound for the pathwise Holder coefficient. eta in (0,1].
double empirical_holder_coefficient(std::span<const double> path, double eta);
double empirical_holder_coefficient_serial(std::span<const double> path,
                                           double eta);

}  // namespace extval
