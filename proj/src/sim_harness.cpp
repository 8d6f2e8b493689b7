#include "squant/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "squant/block_system.hpp"
#include "squant/codec.hpp"
#include "squant/rng.hpp"
#include "squant/sequence_model.hpp"

namespace squant {

namespace {

constexpr std::uint64_t james_stein_key = ~std::uint64_t{0};
constexpr std::uint64_t projection_key = ~std::uint64_t{0} - 1;

double kahan_sum(const std::vector<double>& values) {
  double sum = 0.0, carry = 0.0;
  for (double v : values) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream stream(s);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

CoefficientVector target_coefficients(const std::string& target, std::size_t count) {
  if (target == "doppler") return fourier_coefficients_fft(damped_doppler, count);
  if (target.rfind("file:", 0) == 0) {
    const std::string path = target.substr(5);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open coefficient file: " + path);
    CoefficientVector theta;
    double v;
    while (in >> v) theta.push_back(v);
    if (theta.empty()) throw std::runtime_error("coefficient file is empty: " + path);
    return theta;
  }
  throw std::invalid_argument("unknown target function: " + target);
}

struct Cell {
  std::string estimator;
  double budget;             // +inf for unquantized
  std::uint64_t budget_key;  // seed derivation key
};

double squared_error(const std::vector<double>& estimate, const CoefficientVector& truth,
                     std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (j < truth.size()) ? truth[j] : 0.0;
    const double e = (j < estimate.size()) ? estimate[j] : 0.0;
    acc += (e - t) * (e - t);
  }
  return acc;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig config;
  bool saw_estimators = false;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_number) +
                               ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "function") {
      config.target = value;
    } else if (key == "n") {
      config.sample_sizes.clear();
      for (const auto& item : split_list(value))
        config.sample_sizes.push_back(std::stoull(item));
    } else if (key == "budgets") {
      config.budgets.clear();
      for (const auto& item : split_list(value)) config.budgets.push_back(std::stoull(item));
    } else if (key == "replicates") {
      config.replicates = std::stoull(value);
    } else if (key == "seed") {
      config.master_seed = std::stoull(value);
    } else if (key == "estimators") {
      config.estimators = split_list(value);
      saw_estimators = true;
    } else if (key == "out") {
      config.output_path = value;
    } else if (key == "threads") {
      config.threads = std::stoi(value);
    } else if (key == "m0") {
      config.m0 = std::stod(value);
    } else if (key == "c0") {
      config.c0 = std::stod(value);
    } else {
      throw std::runtime_error("config line " + std::to_string(line_number) + ": unknown key '" +
                               key + "'");
    }
  }
  if (config.sample_sizes.empty())
    throw std::runtime_error("config: at least one sample size (key 'n') is required");
  for (std::size_t n : config.sample_sizes)
    if (n < 4) throw std::runtime_error("config: sample sizes must be >= 4");
  if (config.replicates < 1) throw std::runtime_error("config: replicates must be >= 1");
  for (std::uint64_t b : config.budgets)
    if (b == 0) throw std::runtime_error("config: budgets must be positive");
  if (!(config.m0 > 0.0) || !(config.c0 > 0.0))
    throw std::runtime_error("config: m0 and c0 must be positive");
  if (saw_estimators && config.estimators.empty())
    throw std::runtime_error("config: estimator list is empty");
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_experiment_config(in);
}

std::vector<RiskRecord> run_experiment(const ExperimentConfig& config) {
  for (const auto& tag : config.estimators)
    if (tag != "james-stein" && tag != "quantized" && tag != "projection-oracle")
      throw std::invalid_argument("unknown estimator tag: " + tag);
#ifdef _OPENMP
  if (config.threads > 0) omp_set_num_threads(config.threads);
#endif

  const std::size_t n_max =
      *std::max_element(config.sample_sizes.begin(), config.sample_sizes.end());
  // True coefficients once, well past the largest observation length, so the
  // unobserved tail enters every cell's risk.
  const std::size_t truth_length = 4 * n_max;
  const CoefficientVector truth = target_coefficients(config.target, truth_length);

  std::vector<Cell> cells;
  for (const auto& tag : config.estimators) {
    if (tag == "quantized") {
      for (std::uint64_t b : config.budgets)
        cells.push_back({tag, static_cast<double>(b), b});
    } else {
      cells.push_back({tag, std::numeric_limits<double>::infinity(),
                       tag == "james-stein" ? james_stein_key : projection_key});
    }
  }

  std::vector<RiskRecord> records;
  for (std::size_t n : config.sample_sizes) {
    const double epsilon = 1.0 / std::sqrt(static_cast<double>(n));
    const BlockSystem blocks = build_blocks(epsilon);
    const std::size_t length = blocks.length;
    double tail = 0.0;
    for (std::size_t j = truth.size(); j > length; --j) tail += truth[j - 1] * truth[j - 1];

    // Oracle projection level: minimizes J eps^2 + tail energy beyond J.
    std::size_t oracle_level = length;
    {
      std::vector<double> suffix(length + 1, 0.0);
      for (std::size_t j = length; j > 0; --j)
        suffix[j - 1] = suffix[j] + ((j <= truth.size()) ? truth[j - 1] * truth[j - 1] : 0.0);
      double best = HUGE_VAL;
      for (std::size_t level = 0; level <= length; ++level) {
        const double risk = static_cast<double>(level) * epsilon * epsilon + suffix[level];
        if (risk < best) {
          best = risk;
          oracle_level = level;
        }
      }
    }

    for (const Cell& cell : cells) {
      const std::size_t reps = config.replicates;
      std::vector<double> risks(reps);
      std::string failure;
#pragma omp parallel for schedule(dynamic)
      for (std::int64_t r = 0; r < static_cast<std::int64_t>(reps); ++r) {
        try {
          const std::uint64_t cell_seed = rng::absorb(
              rng::absorb(rng::absorb(config.master_seed, n), cell.budget_key),
              static_cast<std::uint64_t>(r));
          const std::uint64_t obs_seed = rng::absorb(cell_seed, 0);
          const ObservedSequence y = sample_observation(truth, epsilon, obs_seed);

          std::vector<double> estimate;
          if (cell.estimator == "james-stein") {
            estimate.assign(length, 0.0);
            for (std::size_t k = 0; k < blocks.count(); ++k) {
              const auto shrunk =
                  james_stein_block(block_slice(std::span(y.values), k, blocks), epsilon);
              std::copy(shrunk.begin(), shrunk.end(),
                        estimate.begin() + static_cast<std::ptrdiff_t>(blocks.starts[k] - 1));
            }
          } else if (cell.estimator == "projection-oracle") {
            estimate.assign(y.values.begin(),
                            y.values.begin() + static_cast<std::ptrdiff_t>(oracle_level));
          } else {
            CodecConfig codec;
            codec.epsilon = epsilon;
            codec.budget = cell.budget_key;
            codec.seed = rng::absorb(cell_seed, 1);
            codec.m0 = config.m0;
            codec.c0 = config.c0;
            estimate = decode(encode(y, codec), codec).coefficients;
          }
          risks[static_cast<std::size_t>(r)] = squared_error(estimate, truth, length) + tail;
        } catch (const std::exception& e) {
#pragma omp critical
          if (failure.empty())
            failure = "cell n=" + std::to_string(n) + " estimator=" + cell.estimator +
                      " budget=" + std::to_string(cell.budget_key) + ": " + e.what();
        }
      }
      if (!failure.empty()) throw std::runtime_error(failure);

      const double mean = kahan_sum(risks) / static_cast<double>(reps);
      double std_error = 0.0;
      if (reps > 1) {
        std::vector<double> centered(reps);
        for (std::size_t r = 0; r < reps; ++r)
          centered[r] = (risks[r] - mean) * (risks[r] - mean);
        const double variance = kahan_sum(centered) / static_cast<double>(reps - 1);
        std_error = std::sqrt(variance / static_cast<double>(reps));
      }
      records.push_back({n, cell.budget, cell.estimator, mean, std_error, reps});
    }
  }
  return records;
}

void emit_csv(const std::vector<RiskRecord>& records, const std::string& path) {
  std::vector<RiskRecord> sorted = records;
  std::sort(sorted.begin(), sorted.end(), [](const RiskRecord& a, const RiskRecord& b) {
    if (a.estimator != b.estimator) return a.estimator < b.estimator;
    if (a.budget != b.budget) return a.budget < b.budget;
    return a.n < b.n;
  });

  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path + " for writing");
  std::fputs("n,budget,estimator,risk,stderr,replicates\n", out);
  for (const RiskRecord& r : sorted) {
    std::fprintf(out, "%zu,%.12g,%s,%.12g,%.12g,%zu\n", r.n, r.budget, r.estimator.c_str(),
                 r.risk, r.std_error, r.replicates);
  }
  if (std::fclose(out) != 0) throw std::runtime_error("emit_csv: write to " + path + " failed");
}

std::vector<RiskRecord> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "n,budget,estimator,risk,stderr,replicates")
    throw std::runtime_error("parse_csv: unexpected header in " + path);
  std::vector<RiskRecord> records;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_list(line);
    if (fields.size() != 6) throw std::runtime_error("parse_csv: malformed row: " + line);
    RiskRecord r;
    r.n = std::stoull(fields[0]);
    r.budget = std::stod(fields[1]);
    r.estimator = fields[2];
    r.risk = std::stod(fields[3]);
    r.std_error = std::stod(fields[4]);
    r.replicates = std::stoull(fields[5]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace squant
