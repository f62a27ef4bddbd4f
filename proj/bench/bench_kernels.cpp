// Timing comparison between the serial reference kernels and their OpenMP
// twins, plus a raw RNG throughput probe. Run with an optional scale factor:
// bench_kernels [scale]. Results are wall-clock only; treat small deltas as
// noise.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "extval/functionals.hpp"
#include "extval/mc_harness.hpp"
#include "extval/path_gen.hpp"
#include "extval/rng.hpp"
#include "extval/tail_models.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  const auto elapsed = std::chrono::steady_clock::now() - start;
  return std::chrono::duration<double>(elapsed).count();
}

volatile double g_sink = 0.0;

template <typename F>
double time_once(F&& body) {
  const auto start = std::chrono::steady_clock::now();
  g_sink = body();
  return seconds_since(start);
}

void report(const std::string& name, double serial_s, double parallel_s) {
  std::printf("%-34s %10.3fs %10.3fs %8.2fx\n", name.c_str(), serial_s,
              parallel_s, serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  double scale = 1.0;
  if (argc > 1) scale = std::strtod(argv[1], nullptr);
  if (!(scale > 0.0)) {
    std::fprintf(stderr, "usage: bench_kernels [scale > 0]\n");
    return 2;
  }

  std::printf("%-34s %11s %11s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  {
    const std::size_t draws =
        static_cast<std::size_t>(2e8 * scale);
    extval::RandomStream rng(42);
    const auto start = std::chrono::steady_clock::now();
    double acc = 0.0;
    for (std::size_t i = 0; i < draws; ++i) acc += rng.normal();
    const double elapsed = seconds_since(start);
    g_sink = acc;
    std::printf("%-34s %10.3fs %10s %8.1f ns/draw\n", "normal draws (serial only)",
                elapsed, "-", 1e9 * elapsed / static_cast<double>(draws));
  }

  const auto m = static_cast<std::size_t>(4096 * scale);
  const auto n = static_cast<std::size_t>(2000 * scale);

  {
    const extval::ProcessSpec bm = extval::ProcessSpec::brownian();
    const double s = time_once([&] {
      return extval::simulate_driver_serial(bm, m, n, extval::RandomStream(7))
          .row(0)[m - 1];
    });
    const double p = time_once([&] {
      return extval::simulate_driver(bm, m, n, extval::RandomStream(7))
          .row(0)[m - 1];
    });
    report("simulate_driver bm " + std::to_string(m) + "x" + std::to_string(n),
           s, p);
  }

  {
    const extval::ProcessSpec fbm = extval::ProcessSpec::fractional_brownian(
        0.7, extval::FbmMethod::CirculantEmbedding);
    const std::size_t n_fbm = n / 4;
    const double s = time_once([&] {
      return extval::simulate_driver_serial(fbm, m, n_fbm,
                                            extval::RandomStream(7))
          .row(0)[m - 1];
    });
    const double p = time_once([&] {
      return extval::simulate_driver(fbm, m, n_fbm, extval::RandomStream(7))
          .row(0)[m - 1];
    });
    report("simulate_driver fbm H=0.7", s, p);
  }

  const extval::PathMatrix paths = extval::simulate_driver(
      extval::ProcessSpec::brownian(), m, n, extval::RandomStream(11));

  {
    const extval::NormOrder sup = extval::NormOrder::sup();
    const double s = time_once(
        [&] { return extval::batch_norms_serial(paths, sup)[0]; });
    const double p =
        time_once([&] { return extval::batch_norms(paths, sup)[0]; });
    report("batch_norms sup", s, p);
  }

  {
    const extval::NormOrder l2 = extval::NormOrder::finite(2.0);
    const double s =
        time_once([&] { return extval::batch_norms_serial(paths, l2)[0]; });
    const double p =
        time_once([&] { return extval::batch_norms(paths, l2)[0]; });
    report("batch_norms p=2", s, p);
  }

  {
    const std::vector<double> row(paths.row(0).begin(), paths.row(0).end());
    const double s = time_once([&] {
      return extval::empirical_holder_coefficient_serial(row, 0.45);
    });
    const double p = time_once(
        [&] { return extval::empirical_holder_coefficient(row, 0.45); });
    report("holder coefficient m=" + std::to_string(m), s, p);
  }

  {
    extval::ExperimentConfig config;
    config.source = extval::TailModel::pareto(1.0);
    config.n = static_cast<std::size_t>(5000 * scale);
    config.k_rule = extval::KRule::fixed(70);
    config.tail_prob_rule = extval::TailProbRule::one_over_n();
    config.replications = 100;
    config.true_gamma = 1.0;
    config.master_seed = 3;
    const double s = time_once([&] {
      return extval::run_experiment_serial(config).summary.mean_gamma_hat;
    });
    const double p = time_once(
        [&] { return extval::run_experiment(config).summary.mean_gamma_hat; });
    report("run_experiment pareto direct", s, p);
  }

  return 0;
}
