#include "squant/bit_allocation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace squant {

namespace {

constexpr double two_ln2 = 2.0 * M_LN2;

double rate_at_multiplier(const AllocationProblem& p, double lambda, std::vector<double>* bits) {
  double used = 0.0;
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    const double size = static_cast<double>(p.sizes[k]);
    double b = 0.0;
    if (p.weights[k] > 0.0) {
      const double ratio = two_ln2 * p.weights[k] / (lambda * size);
      if (ratio > 1.0) b = 0.5 * std::log2(ratio);
    }
    if (bits) (*bits)[k] = b;
    used += size * b;
  }
  return used;
}

}  // namespace

double Allocation::objective(const AllocationProblem& problem) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < bits.size(); ++k)
    acc += problem.weights[k] * std::exp2(-2.0 * bits[k]);
  return acc;
}

Allocation allocate_bits(const AllocationProblem& problem) {
  const std::size_t n = problem.weights.size();
  if (n == 0 || problem.sizes.size() != n)
    throw std::invalid_argument("allocate_bits: weights and sizes must be nonempty and congruent");
  if (problem.budget < 0.0) throw std::invalid_argument("allocate_bits: budget must be >= 0");
  double lambda_zero = 0.0;  // smallest multiplier certifying the zero allocation
  for (std::size_t k = 0; k < n; ++k) {
    if (problem.weights[k] < 0.0) throw std::invalid_argument("allocate_bits: negative weight");
    if (problem.sizes[k] == 0) throw std::invalid_argument("allocate_bits: zero block size");
    lambda_zero = std::fmax(lambda_zero, two_ln2 * problem.weights[k] /
                                             static_cast<double>(problem.sizes[k]));
  }

  Allocation out{std::vector<double>(n, 0.0), lambda_zero};
  if (problem.budget == 0.0 || lambda_zero == 0.0) return out;

  // The budget actually used, sum_k T_k b_k(lambda), decreases continuously in
  // lambda and hits zero at lambda_zero; bracket downward and bisect.
  double hi = lambda_zero;
  double lo = lambda_zero;
  while (rate_at_multiplier(problem, lo, nullptr) < problem.budget) {
    lo *= 0.5;
    if (lo < 1e-300) break;
  }
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-14 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (rate_at_multiplier(problem, mid, nullptr) >= problem.budget)
      lo = mid;
    else
      hi = mid;
  }
  // The upper end keeps the allocation within budget.
  out.multiplier = hi;
  rate_at_multiplier(problem, hi, &out.bits);
  return out;
}

double WaterfillResult::total_distortion() const {
  double acc = 0.0;
  for (double d : distortions) acc += d;
  return acc;
}

WaterfillResult reverse_waterfill(std::span<const double> sigma2, double epsilon, double budget) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("reverse_waterfill: epsilon must be positive");
  if (budget < 0.0) throw std::invalid_argument("reverse_waterfill: budget must be >= 0");

  const std::size_t n = sigma2.size();
  std::vector<double> ceiling(n);  // no-coding distortion sigma^4 / (sigma^2 + eps^2)
  double top = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(sigma2[j] >= 0.0) || !std::isfinite(sigma2[j]))
      throw std::invalid_argument("reverse_waterfill: variances must be finite and >= 0");
    ceiling[j] = sigma2[j] * sigma2[j] / (sigma2[j] + epsilon * epsilon);
    top = std::fmax(top, ceiling[j]);
  }

  const auto rate_at = [&](double eta) {
    double rate = 0.0;
    for (double g : ceiling)
      if (g > eta) rate += 0.5 * std::log2(g / eta);
    return rate;
  };

  WaterfillResult out;
  out.level = top;
  if (budget == 0.0 || top == 0.0) {
    out.distortions.assign(ceiling.begin(), ceiling.end());
    out.rate = 0.0;
    return out;
  }

  double hi = top;
  double lo = top;
  while (rate_at(lo) < budget) {
    lo *= 0.5;
    if (lo < 1e-300) break;
  }
  for (int iter = 0; iter < 500 && (hi - lo) > 1e-15 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (rate_at(mid) >= budget)
      lo = mid;
    else
      hi = mid;
  }
  out.level = hi;
  out.distortions.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.distortions[j] = std::fmin(hi, ceiling[j]);
  out.rate = rate_at(hi);
  return out;
}

}  // namespace squant
