// Per-block bit allocation for the coding scheme and reverse water-filling
// for the rate-distortion inner minimization. Rates are in bits (log base 2).

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace squant {

struct AllocationProblem {
  std::vector<double> weights;     // s_k >= 0, squared-signal units
  std::vector<std::size_t> sizes;  // T_k >= 1
  double budget;                   // B >= 0 bits
};

struct Allocation {
  std::vector<double> bits;  // per-coefficient rates b_k >= 0
  double multiplier;         // KKT multiplier lambda

  double objective(const AllocationProblem& problem) const;
};

// Minimizes sum_k s_k 2^{-2 b_k} subject to sum_k T_k b_k <= B, b_k >= 0.
// Solved by bisection on the multiplier; at the optimum,
//   b_k > 0  =>  (2 ln 2) s_k 2^{-2 b_k} = lambda T_k,
//   b_k = 0  =>  (2 ln 2) s_k <= lambda T_k.
Allocation allocate_bits(const AllocationProblem& problem);

struct WaterfillResult {
  std::vector<double> distortions;  // mu_j^2
  double level;                     // eta
  double rate;                      // bits consumed

  double total_distortion() const;
};

// Given prior variances sigma2 and noise level eps, finds the water level eta
// with mu_j^2 = min(eta, sigma_j^4 / (sigma_j^2 + eps^2)) such that
// sum_j (1/2) log2+ (sigma_j^4 / (mu_j^2 (sigma_j^2 + eps^2))) <= B, binding
// whenever B > 0 and some sigma_j > 0.
WaterfillResult reverse_waterfill(std::span<const double> sigma2, double epsilon, double budget);

}  // namespace squant
