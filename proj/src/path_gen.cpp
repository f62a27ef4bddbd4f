#include "extval/path_gen.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "extval/numfmt.hpp"

namespace extval {

namespace {

/// Autocovariance of standard (unit-spacing) fractional Gaussian noise at
/// integer lag j: 0.5((j+1)^{2H} - 2 j^{2H} + (j-1)^{2H}).
double fgn_autocov(std::size_t j, double hurst) {
  if (j == 0) return 1.0;
  const double h2 = 2.0 * hurst;
  const double jd = static_cast<double>(j);
  return 0.5 * (std::pow(jd + 1.0, h2) - 2.0 * std::pow(jd, h2) +
                std::pow(jd - 1.0, h2));
}

fftw_complex* as_fftw(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}

}  // namespace

ProcessSpec ProcessSpec::brownian() {
  ProcessSpec spec;
  spec.kind = ProcessKind::BrownianMotion;
  spec.hurst = 0.5;
  spec.holder_exponent = 0.5;
  return spec;
}

ProcessSpec ProcessSpec::fractional_brownian(double hurst, FbmMethod method) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw std::invalid_argument("Hurst exponent must lie in (0,1)");
  }
  ProcessSpec spec;
  spec.kind = ProcessKind::FractionalBrownianMotion;
  spec.hurst = hurst;
  spec.method = method;
  spec.holder_exponent = hurst;
  return spec;
}

ProcessSpec ProcessSpec::ramp() {
  ProcessSpec spec;
  spec.kind = ProcessKind::DeterministicRamp;
  spec.holder_exponent = 1.0;
  return spec;
}

ProcessSpec ProcessSpec::constant(double level) {
  ProcessSpec spec;
  spec.kind = ProcessKind::DeterministicConstant;
  spec.constant_level = level;
  spec.holder_exponent = 1.0;
  return spec;
}

bool ProcessSpec::is_random() const {
  return kind == ProcessKind::BrownianMotion ||
         kind == ProcessKind::FractionalBrownianMotion;
}

std::string ProcessSpec::moment_order_bound() const {
  switch (kind) {
    case ProcessKind::BrownianMotion:
    case ProcessKind::FractionalBrownianMotion:
      return "all orders (Gaussian increments)";
    case ProcessKind::DeterministicRamp:
      return "all orders (deterministic Lipschitz path)";
    case ProcessKind::DeterministicConstant:
      return "all orders (no increments)";
  }
  return {};
}

std::string ProcessSpec::describe() const {
  switch (kind) {
    case ProcessKind::BrownianMotion:
      return "brownian_motion";
    case ProcessKind::FractionalBrownianMotion:
      return "fractional_brownian_motion(hurst=" + format_sig12(hurst) +
             (method == FbmMethod::CirculantEmbedding ? ", circulant"
                                                      : ", cholesky") +
             ")";
    case ProcessKind::DeterministicRamp:
      return "ramp";
    case ProcessKind::DeterministicConstant:
      return "constant(" + format_sig12(constant_level) + ")";
  }
  return {};
}

double sample_multiplier(const MultiplierSpec& spec, RandomStream& stream) {
  if (const TailModel* model = std::get_if<TailModel>(&spec)) {
    return model->quantile_from_uniform(stream.uniform01());
  }
  const double fixed = std::get<double>(spec);
  if (!(fixed > 0.0)) {
    throw std::invalid_argument("fixed multiplier must be positive");
  }
  return fixed;
}

std::string describe_multiplier(const MultiplierSpec& spec) {
  if (const TailModel* model = std::get_if<TailModel>(&spec)) {
    return model->describe();
  }
  return "fixed(" + format_sig12(std::get<double>(spec)) + ")";
}

namespace {

std::size_t checked_cell_count(std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) {
    throw std::invalid_argument("path matrix dimensions must be positive");
  }
  return n * m;
}

}  // namespace

PathMatrix::PathMatrix(std::size_t n_paths, std::size_t grid_size)
    : n_(n_paths),
      m_(grid_size),
      values_(checked_cell_count(n_paths, grid_size), 0.0) {}

void PathMatrix::write_csv(std::ostream& out,
                           const std::string& comment) const {
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
  }
  out << m_ << ',' << n_ << '\n';
  for (std::size_t i = 0; i < n_; ++i) {
    const auto r = row(i);
    for (std::size_t j = 0; j < m_; ++j) {
      if (j != 0) out << ',';
      out << format_sig17(r[j]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("path matrix write failed");
}

namespace {

bool skippable(const std::string& line) {
  return line.empty() || line[0] == '#';
}

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
  std::vector<double> values;
  const char* p = line.c_str();
  while (true) {
    char* end = nullptr;
    const double v = std::strtod(p, &end);
    if (end == p) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected a number, got '" + std::string(p) +
                               "'");
    }
    values.push_back(v);
    p = end;
    while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
    if (*p == '\0') break;
    if (*p != ',') {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected ',' separator, got '" +
                               std::string(1, *p) + "'");
    }
    ++p;
  }
  return values;
}

}  // namespace

PathMatrix PathMatrix::read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const std::vector<double> header = parse_row(line, line_no);
    if (header.size() != 2 || header[0] < 1 || header[1] < 1 ||
        header[0] != std::floor(header[0]) ||
        header[1] != std::floor(header[1])) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected header 'm,n' with positive integers");
    }
    m = static_cast<std::size_t>(header[0]);
    n = static_cast<std::size_t>(header[1]);
    have_header = true;
    break;
  }
  if (!have_header) throw std::runtime_error("missing 'm,n' header line");

  PathMatrix paths(n, m);
  std::size_t filled = 0;
  while (filled < n && std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const std::vector<double> values = parse_row(line, line_no);
    if (values.size() != m) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(m) + " values, got " +
                               std::to_string(values.size()));
    }
    std::copy(values.begin(), values.end(), paths.row(filled).begin());
    ++filled;
  }
  if (filled != n) {
    throw std::runtime_error("expected " + std::to_string(n) +
                             " path rows, found " + std::to_string(filled));
  }
  return paths;
}

DriverSimulator::DriverSimulator(const ProcessSpec& spec, std::size_t m)
    : spec_(spec), m_(m) {
  if (m_ < 2) throw std::invalid_argument("grid size m must be at least 2");
  switch (spec_.kind) {
    case ProcessKind::BrownianMotion:
      increment_scale_ = 1.0 / std::sqrt(static_cast<double>(m_));
      break;
    case ProcessKind::FractionalBrownianMotion:
      if (!(spec_.hurst > 0.0 && spec_.hurst < 1.0)) {
        throw std::invalid_argument("Hurst exponent must lie in (0,1)");
      }
      increment_scale_ = std::pow(static_cast<double>(m_), -spec_.hurst);
      if (spec_.method == FbmMethod::CirculantEmbedding) {
        setup_circulant();
      } else {
        setup_cholesky();
      }
      break;
    case ProcessKind::DeterministicRamp:
    case ProcessKind::DeterministicConstant:
      break;
  }
}

DriverSimulator::~DriverSimulator() {
  if (plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void DriverSimulator::setup_circulant() {
  const std::size_t len = m_ - 1;     // fGn values per path
  const std::size_t embed = 2 * len;  // circulant dimension
  embed_size_ = embed;

  std::vector<std::complex<double>> first_row(embed), spectrum(embed);
  for (std::size_t j = 0; j <= len; ++j) {
    first_row[j] = fgn_autocov(j, spec_.hurst);
  }
  for (std::size_t j = len + 1; j < embed; ++j) {
    first_row[j] = first_row[embed - j];
  }

  // One shared out-of-place plan; rows execute it on private buffers via the
  // new-array interface, which FFTW documents as thread-safe. FFTW_UNALIGNED
  // lifts the alignment requirement those buffers would otherwise inherit.
  fftw_plan plan = fftw_plan_dft_1d(
      static_cast<int>(embed), as_fftw(first_row.data()),
      as_fftw(spectrum.data()), FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan == nullptr) throw std::runtime_error("FFT plan creation failed");
  fftw_execute_dft(plan, as_fftw(first_row.data()), as_fftw(spectrum.data()));

  double top = 0.0;
  for (const auto& z : spectrum) top = std::max(top, z.real());
  const double tolerance = 1e-9 * std::max(1.0, top);
  sqrt_eigenvalues_.resize(embed);
  for (std::size_t k = 0; k < embed; ++k) {
    const double eig = spectrum[k].real();
    if (eig < -tolerance) {
      fftw_destroy_plan(plan);
      throw std::runtime_error(
          "circulant embedding of the fGn covariance has negative spectral "
          "value " +
          format_sig12(eig) + " at hurst=" + format_sig12(spec_.hurst) +
          ", m=" + std::to_string(m_) +
          "; retry with the dense Cholesky method");
    }
    sqrt_eigenvalues_[k] = std::sqrt(std::max(eig, 0.0));
  }
  plan_ = plan;
}

void DriverSimulator::setup_cholesky() {
  const std::size_t len = m_ - 1;
  if (len > 4096) {
    throw std::invalid_argument(
        "dense Cholesky synthesis is limited to m <= 4097; use the circulant "
        "method for larger grids");
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(len);
  Eigen::MatrixXd cov(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double c = fgn_autocov(static_cast<std::size_t>(i - j), spec_.hurst);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "fGn covariance failed the Cholesky factorization at m=" +
        std::to_string(m_));
  }
  const Eigen::MatrixXd factor = llt.matrixL();
  chol_.assign(len * len, 0.0);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      chol_[static_cast<std::size_t>(i) * len + static_cast<std::size_t>(j)] =
          factor(i, j);
    }
  }
}

void DriverSimulator::fill_row(RandomStream& stream,
                               std::span<double> row) const {
  if (row.size() != m_) {
    throw std::invalid_argument("row span does not match the grid size");
  }
  switch (spec_.kind) {
    case ProcessKind::DeterministicRamp:
      for (std::size_t j = 0; j < m_; ++j) {
        row[j] = static_cast<double>(j) / static_cast<double>(m_);
      }
      return;
    case ProcessKind::DeterministicConstant:
      std::fill(row.begin(), row.end(), spec_.constant_level);
      return;
    case ProcessKind::BrownianMotion:
      fill_brownian(stream, row);
      return;
    case ProcessKind::FractionalBrownianMotion:
      if (spec_.method == FbmMethod::CirculantEmbedding) {
        fill_fbm_circulant(stream, row);
      } else {
        fill_fbm_cholesky(stream, row);
      }
      return;
  }
}

void DriverSimulator::fill_brownian(RandomStream& stream,
                                    std::span<double> row) const {
  row[0] = 0.0;
  double level = 0.0;
  for (std::size_t j = 1; j < m_; ++j) {
    level += increment_scale_ * stream.normal();
    row[j] = level;
  }
}

void DriverSimulator::fill_fbm_circulant(RandomStream& stream,
                                         std::span<double> row) const {
  const std::size_t embed = embed_size_;
  const std::size_t half = embed / 2;
  std::vector<std::complex<double>> coeff(embed), transformed(embed);

  // Hermitian spectral coefficients in a fixed draw order so every row
  // consumes exactly `embed` normals.
  coeff[0] = sqrt_eigenvalues_[0] * stream.normal();
  for (std::size_t k = 1; k < half; ++k) {
    const double re = stream.normal();
    const double im = stream.normal();
    const double s = sqrt_eigenvalues_[k] * M_SQRT1_2;
    coeff[k] = {s * re, s * im};
    coeff[embed - k] = std::conj(coeff[k]);
  }
  coeff[half] = sqrt_eigenvalues_[half] * stream.normal();

  fftw_execute_dft(static_cast<fftw_plan>(plan_), as_fftw(coeff.data()),
                   as_fftw(transformed.data()));

  // Real part / sqrt(embed) is standard fGn; rescale to spacing 1/m and
  // integrate from Z(0) = 0.
  const double spectral_norm = 1.0 / std::sqrt(static_cast<double>(embed));
  row[0] = 0.0;
  double level = 0.0;
  for (std::size_t j = 1; j < m_; ++j) {
    level += increment_scale_ * (transformed[j - 1].real() * spectral_norm);
    row[j] = level;
  }
}

void DriverSimulator::fill_fbm_cholesky(RandomStream& stream,
                                        std::span<double> row) const {
  const std::size_t len = m_ - 1;
  std::vector<double> white(len);
  for (double& g : white) g = stream.normal();
  row[0] = 0.0;
  double level = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double* fac = chol_.data() + i * len;
    double increment = 0.0;
    for (std::size_t j = 0; j <= i; ++j) increment += fac[j] * white[j];
    level += increment_scale_ * increment;
    row[i + 1] = level;
  }
}

namespace {

PathMatrix simulate_driver_impl(const ProcessSpec& spec, std::size_t m,
                                std::size_t n, const RandomStream& rng,
                                bool parallel) {
  if (n < 1) throw std::invalid_argument("path count n must be at least 1");
  const DriverSimulator sim(spec, m);
  PathMatrix paths(n, m);
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const std::size_t idx = static_cast<std::size_t>(i);
    RandomStream driver_stream =
        rng.fork(idx).fork(stream_tag::kDriver);
    sim.fill_row(driver_stream, paths.row(idx));
  }
  return paths;
}

PathMatrix simulate_product_impl(const ProductSpec& spec, std::size_t m,
                                 std::size_t n, const RandomStream& rng,
                                 bool parallel) {
  if (n < 1) throw std::invalid_argument("path count n must be at least 1");
  if (!spec.driver.starts_at_zero()) {
    throw std::invalid_argument(
        "constant driver is excluded from product paths (Z(0) must be 0)");
  }
  if (const double* fixed = std::get_if<double>(&spec.multiplier)) {
    // Validate here; sample_multiplier runs inside the parallel loop where a
    // throw could not propagate.
    if (!(*fixed > 0.0)) {
      throw std::invalid_argument("fixed multiplier must be positive");
    }
  }
  const DriverSimulator sim(spec.driver, m);
  PathMatrix paths(n, m);
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const std::size_t idx = static_cast<std::size_t>(i);
    const RandomStream row_base = rng.fork(idx);
    RandomStream mult_stream = row_base.fork(stream_tag::kMultiplier);
    const double r = sample_multiplier(spec.multiplier, mult_stream);
    RandomStream driver_stream = row_base.fork(stream_tag::kDriver);
    auto row = paths.row(idx);
    sim.fill_row(driver_stream, row);
    for (double& y : row) y *= r;
  }
  return paths;
}

}  // namespace

PathMatrix simulate_driver(const ProcessSpec& spec, std::size_t m,
                           std::size_t n, const RandomStream& rng) {
  return simulate_driver_impl(spec, m, n, rng, true);
}

PathMatrix simulate_driver_serial(const ProcessSpec& spec, std::size_t m,
                                  std::size_t n, const RandomStream& rng) {
  return simulate_driver_impl(spec, m, n, rng, false);
}

PathMatrix simulate_product(const ProductSpec& spec, std::size_t m,
                            std::size_t n, const RandomStream& rng) {
  return simulate_product_impl(spec, m, n, rng, true);
}

PathMatrix simulate_product_serial(const ProductSpec& spec, std::size_t m,
                                   std::size_t n, const RandomStream& rng) {
  return simulate_product_impl(spec, m, n, rng, false);
}

namespace {

double holder_impl(std::span<const double> path, double eta, bool parallel) {
  if (path.size() < 2) {
    throw std::invalid_argument("need at least two grid points");
  }
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("eta must lie in (0,1]");
  }
  const std::size_t m = path.size();
  // ((j'-j)/m)^{-eta} depends only on the index gap; hoist it out of the
  // O(m^2) pair scan.
  std::vector<double> inv_gap_pow(m, 0.0);
  for (std::size_t d = 1; d < m; ++d) {
    inv_gap_pow[d] =
        std::pow(static_cast<double>(d) / static_cast<double>(m), -eta);
  }
  double best = 0.0;
  const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(m) - 1;
#pragma omp parallel for schedule(static) reduction(max : best) if (parallel)
  for (std::ptrdiff_t j = 0; j < last; ++j) {
    const std::size_t lo = static_cast<std::size_t>(j);
    for (std::size_t hi = lo + 1; hi < m; ++hi) {
      const double candidate =
          std::abs(path[hi] - path[lo]) * inv_gap_pow[hi - lo];
      best = std::max(best, candidate);
    }
  }
  return best;
}

}  // namespace

double empirical_holder_coefficient(std::span<const double> path, double eta) {
  return holder_impl(path, eta, true);
}

double empirical_holder_coefficient_serial(std::span<const double> path,
                                           double eta) {
  return holder_impl(path, eta, false);
}

}  // namespace extval
