// Monte Carlo driver: risk-versus-budget curves for quantized and unquantized
// estimators on a known target function, with reproducible per-replicate
// seeding and plot-ready CSV output.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace squant {

struct ExperimentConfig {
  std::string target = "doppler";  // builtin name, or "file:<path>" of coefficients
  std::vector<std::size_t> sample_sizes;  // effective n; eps = 1/sqrt(n)
  std::vector<std::uint64_t> budgets;     // bits for the quantized estimator
  std::size_t replicates = 200;
  std::uint64_t master_seed = 1;
  std::vector<std::string> estimators = {"james-stein", "quantized", "projection-oracle"};
  std::string output_path;
  int threads = 0;  // 0 keeps the runtime default
  // Smoothness/radius bounds handed to the codec. The scheme is adaptive only
  // when the target truly satisfies them (m >= m0, c <= c0); a too-large m0
  // makes the radius clamp truncate real signal.
  double m0 = 1.0;
  double c0 = 1.0;
};

// Flat key=value text; '#' starts a comment, lists are comma-separated.
// Keys: function, n, budgets, replicates, seed, estimators, out, threads,
// m0, c0.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::string& path);

struct RiskRecord {
  std::size_t n = 0;
  double budget = 0.0;  // bits; +infinity for unquantized estimators
  std::string estimator;
  double risk = 0.0;
  double std_error = 0.0;
  std::size_t replicates = 0;

  friend bool operator==(const RiskRecord&, const RiskRecord&) = default;
};

// Runs every (n, estimator, budget) cell. Risks are squared l2 errors against
// the truncated true coefficients plus the deterministic tail energy beyond
// N, so cells with different n measure against the same target. Deterministic
// given the master seed; replicates may run concurrently.
std::vector<RiskRecord> run_experiment(const ExperimentConfig& config);

// Header n,budget,estimator,risk,stderr,replicates; rows sorted by
// (estimator, budget, n); floats at 12 significant digits.
void emit_csv(const std::vector<RiskRecord>& records, const std::string& path);
std::vector<RiskRecord> parse_csv(const std::string& path);

}  // namespace squant
