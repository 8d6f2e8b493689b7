// Timing comparison between the serial reference kernels and their OpenMP
// counterparts: codebook direction scans and the Monte Carlo harness loop.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "squant/codec.hpp"
#include "squant/rng.hpp"
#include "squant/sim_harness.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

void bench_scan(std::size_t dim, unsigned log2_rows) {
  std::vector<double> y(dim);
  for (std::size_t i = 0; i < dim; ++i) y[i] = squant::rng::normal(7, 0, i);
  const std::uint64_t rows = std::uint64_t{1} << log2_rows;

  auto start = clock_type::now();
  const std::uint64_t serial = squant::select_direction_serial(11, 0, rows, y);
  const double serial_time = seconds_since(start);

  start = clock_type::now();
  const std::uint64_t parallel = squant::select_direction(11, 0, rows, y);
  const double parallel_time = seconds_since(start);

  std::printf("scan,t=%zu,rows=2^%u,serial_s=%.4f,parallel_s=%.4f,speedup=%.2f,match=%d\n", dim,
              log2_rows, serial_time, parallel_time, serial_time / parallel_time,
              serial == parallel);
}

void bench_harness(int threads) {
  squant::ExperimentConfig config;
  config.target = "doppler";
  config.sample_sizes = {2000};
  config.budgets = {20};
  config.replicates = 40;
  config.master_seed = 99;
  config.estimators = {"quantized"};
  config.threads = threads;

  const auto start = clock_type::now();
  const auto records = squant::run_experiment(config);
  std::printf("harness,threads=%d,seconds=%.3f,risk=%.6g\n", threads, seconds_since(start),
              records.front().risk);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp,max_threads=%d\n", omp_get_max_threads());
#else
  std::printf("openmp,disabled\n");
#endif
  bench_scan(16, 14);
  bench_scan(16, 18);
  bench_scan(64, 16);
  bench_harness(1);
#ifdef _OPENMP
  if (omp_get_max_threads() > 1) bench_harness(omp_get_max_threads());
#endif
  return 0;
}
