// Command-line front end: block inspection, encode/decode of observation
// files, theoretical constants, and the Monte Carlo experiment driver.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "squant/block_system.hpp"
#include "squant/bounds.hpp"
#include "squant/codec.hpp"
#include "squant/rng.hpp"
#include "squant/sequence_model.hpp"
#include "squant/sim_harness.hpp"

namespace {

std::vector<double> read_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> values;
  std::string token;
  while (std::getline(in, token, ',')) {
    std::stringstream stream(token);
    double v;
    while (stream >> v) values.push_back(v);
  }
  return values;
}

void write_values(const std::string& path, const std::vector<double>& values) {
  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (double v : values) std::fprintf(out, "%.17g\n", v);
  if (std::fclose(out) != 0) throw std::runtime_error("write to " + path + " failed");
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized estimation over Sobolev ellipsoids"};
  app.require_subcommand(1);

  auto* blocks_cmd = app.add_subcommand("blocks", "Print the weakly geometric block system");
  double blocks_epsilon = 0.0;
  bool blocks_summary = false;
  blocks_cmd->add_option("--epsilon", blocks_epsilon, "Noise level in (0,1)")->required();
  blocks_cmd->add_flag("--summary", blocks_summary, "Print epsilon,N,K,rho instead of the table");

  auto* encode_cmd = app.add_subcommand("encode", "Encode an observation file");
  std::string encode_input, encode_output;
  double encode_epsilon = 0.0, encode_m0 = 1.0, encode_c0 = 1.0;
  std::uint64_t encode_budget = 0, encode_seed = 0, noise_seed = 0;
  bool from_coefficients = false;
  encode_cmd->add_option("--input", encode_input, "CSV of observations (or coefficients)")
      ->required();
  encode_cmd->add_option("--epsilon", encode_epsilon, "Noise level in (0,1)")->required();
  encode_cmd->add_option("--budget", encode_budget, "Direction-bit budget B")->required();
  encode_cmd->add_option("--seed", encode_seed, "Shared base-code seed")->required();
  encode_cmd->add_option("--out", encode_output, "Output bitstream path")->required();
  encode_cmd->add_option("--m0", encode_m0, "Smoothness lower bound (default 1)");
  encode_cmd->add_option("--c0", encode_c0, "Radius upper bound (default 1)");
  encode_cmd->add_flag("--from-coefficients", from_coefficients,
                       "Treat the input as true coefficients and simulate the observation");
  encode_cmd->add_option("--noise-seed", noise_seed,
                         "Observation seed used with --from-coefficients");

  auto* decode_cmd = app.add_subcommand("decode", "Decode a bitstream to coefficients");
  std::string decode_input, decode_output;
  decode_cmd->add_option("--in", decode_input, "Input bitstream path")->required();
  decode_cmd->add_option("--out", decode_output, "Output coefficient CSV path")->required();

  auto* bounds_cmd = app.add_subcommand("bounds", "Print theoretical risk constants");
  double bounds_m = 0.0, bounds_c = 0.0, bounds_d = 0.0, bounds_epsilon = 0.0;
  std::uint64_t bounds_budget = 0;
  std::size_t bounds_grid = 2048;
  bounds_cmd->add_option("--m", bounds_m, "Smoothness order")->required();
  bounds_cmd->add_option("--c", bounds_c, "Sobolev radius")->required();
  bounds_cmd->add_option("--d", bounds_d, "Bits per coefficient for the variational constant");
  bounds_cmd->add_option("--epsilon", bounds_epsilon, "Noise level for the risk bound");
  bounds_cmd->add_option("--budget", bounds_budget, "Bit budget for the risk bound");
  bounds_cmd->add_option("--grid", bounds_grid, "Variational solver grid size");

  auto* simulate_cmd = app.add_subcommand("simulate", "Run the Monte Carlo experiment");
  std::string simulate_config, simulate_out;
  int simulate_threads = 0;
  simulate_cmd->add_option("--config", simulate_config, "Experiment config file")->required();
  simulate_cmd->add_option("--out", simulate_out, "Output CSV path")->required();
  simulate_cmd->add_option("--threads", simulate_threads, "Worker thread count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*blocks_cmd) {
      const squant::BlockSystem blocks = squant::build_blocks(blocks_epsilon);
      if (blocks_summary) {
        std::printf("epsilon,N,K,rho\n%.12g,%zu,%zu,%.12g\n", blocks.epsilon, blocks.length,
                    blocks.count(), blocks.rho);
      } else {
        std::printf("k,T,j\n");
        for (std::size_t k = 0; k < blocks.count(); ++k)
          std::printf("%zu,%zu,%zu\n", k + 1, blocks.sizes[k], blocks.starts[k]);
      }
    } else if (*encode_cmd) {
      const double log_inv = std::log(1.0 / encode_epsilon);
      if (static_cast<double>(encode_budget) < log_inv * log_inv * log_inv)
        std::cerr << "warning: budget below log^3(1/epsilon); the weakly geometric blocking is "
                     "outside its guaranteed regime\n";
      squant::CodecConfig cfg;
      cfg.epsilon = encode_epsilon;
      cfg.budget = encode_budget;
      cfg.seed = encode_seed;
      cfg.m0 = encode_m0;
      cfg.c0 = encode_c0;
      squant::ObservedSequence y{read_values(encode_input), encode_epsilon};
      if (from_coefficients)
        y = squant::sample_observation(y.values, encode_epsilon, noise_seed);
      write_bytes(encode_output, squant::serialize(squant::encode(y, cfg)));
    } else if (*decode_cmd) {
      const squant::QuantizedMessage msg = squant::deserialize(read_bytes(decode_input));
      squant::CodecConfig cfg;
      cfg.epsilon = msg.epsilon;
      cfg.budget = msg.budget;
      cfg.seed = msg.seed;
      cfg.m0 = msg.m0;
      cfg.c0 = msg.c0;
      write_values(decode_output, squant::decode(msg, cfg).coefficients);
    } else if (*bounds_cmd) {
      std::printf("pinsker,insufficient,V,regime,risk_upper_bound\n");
      std::printf("%.12g,%.12g,", squant::pinsker_constant(bounds_m, bounds_c),
                  squant::insufficient_constant(bounds_m, bounds_c));
      if (bounds_d > 0.0)
        std::printf("%.12g,", squant::solve_variational(bounds_m, bounds_c, bounds_d, bounds_grid)
                                  .value);
      else
        std::printf(",");
      if (bounds_epsilon > 0.0 && bounds_budget > 0) {
        const squant::RiskBound bound = squant::risk_upper_bound(
            bounds_epsilon, static_cast<double>(bounds_budget), bounds_m, bounds_c);
        std::printf("%s,%.12g\n", squant::regime_name(bound.regime), bound.value);
      } else {
        std::printf(",\n");
      }
    } else if (*simulate_cmd) {
      squant::ExperimentConfig config = squant::load_experiment_config(simulate_config);
      config.output_path = simulate_out;
      if (simulate_threads > 0) config.threads = simulate_threads;
      squant::emit_csv(squant::run_experiment(config), config.output_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
