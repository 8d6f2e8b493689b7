#include <doctest.h>

#include <initializer_list>
#include <stdexcept>

#include <cmath>
#include <vector>

#include "squant/bit_allocation.hpp"
#include "squant/rng.hpp"

using namespace squant;

TEST_SUITE_BEGIN("bit_allocation");

namespace {

double kkt_residual(const AllocationProblem& p, const Allocation& a) {
  // b_k > 0: (2 ln 2) s_k 2^{-2 b_k} = lambda T_k; b_k = 0: (2 ln 2) s_k <= lambda T_k.
  double worst = 0.0;
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    const double lhs = 2.0 * M_LN2 * p.weights[k] * std::exp2(-2.0 * a.bits[k]);
    const double rhs = a.multiplier * double(p.sizes[k]);
    if (a.bits[k] > 0.0)
      worst = std::max(worst, std::fabs(lhs - rhs) / std::max(rhs, 1e-300));
    else if (lhs > rhs)
      worst = std::max(worst, (lhs - rhs) / std::max(rhs, 1e-300));
  }
  return worst;
}

}  // namespace

TEST_CASE("two-block allocation solves the KKT system") {
  const AllocationProblem p{{4.0, 1.0}, {1, 1}, 2.0};
  const Allocation a = allocate_bits(p);
  CHECK(a.bits[0] == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(a.bits[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(a.objective(p) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(kkt_residual(p, a) < 1e-9);

  // 0.001-step grid confirmation along the budget line b2 = B - b1.
  double best = HUGE_VAL, best_b1 = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double b1 = i * 0.001;
    const double value = 4.0 * std::exp2(-2.0 * b1) + std::exp2(-2.0 * (2.0 - b1));
    if (value < best) {
      best = value;
      best_b1 = b1;
    }
  }
  CHECK(std::fabs(best_b1 - a.bits[0]) <= 0.001 + 1e-9);
  CHECK(a.objective(p) <= best + 1e-9);
}

TEST_CASE("degenerate budgets and weights") {
  const AllocationProblem zero_budget{{3.0, 2.0}, {2, 3}, 0.0};
  const Allocation a = allocate_bits(zero_budget);
  CHECK(a.bits == std::vector<double>{0.0, 0.0});
  CHECK(a.objective(zero_budget) == doctest::Approx(5.0));
  CHECK(kkt_residual(zero_budget, a) < 1e-12);

  const AllocationProblem zero_weights{{0.0, 0.0}, {1, 1}, 5.0};
  const Allocation b = allocate_bits(zero_weights);
  CHECK(b.bits == std::vector<double>{0.0, 0.0});
  CHECK(b.objective(zero_weights) == 0.0);

  const AllocationProblem mixed{{1.0, 0.0}, {1, 4}, 3.0};
  const Allocation c = allocate_bits(mixed);
  CHECK(c.bits[1] == 0.0);
  CHECK(c.bits[0] == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("symmetric problems get symmetric optima") {
  const AllocationProblem p{{1.0, 1.0, 1.0}, {1, 1, 1}, 3.0};
  const Allocation a = allocate_bits(p);
  for (double b : a.bits) CHECK(b == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("optimum beats 1000 random feasible allocations") {
  const AllocationProblem p{{2.5, 0.8, 0.1, 1.4}, {3, 5, 2, 7}, 9.0};
  const Allocation a = allocate_bits(p);
  const double opt = a.objective(p);
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    std::vector<double> raw(4);
    double used = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      raw[k] = rng::uniform(555, trial, k);
      used += double(p.sizes[k]) * raw[k];
    }
    const double scale = p.budget / used * rng::uniform(556, trial, 0);
    double value = 0.0;
    for (std::size_t k = 0; k < 4; ++k)
      value += p.weights[k] * std::exp2(-2.0 * raw[k] * scale);
    CHECK(opt <= value + 1e-12);
  }
}

TEST_CASE("objective is monotone nonincreasing in the budget") {
  const AllocationProblem base{{1.0, 3.0, 0.4}, {2, 4, 3}, 0.0};
  double previous = HUGE_VAL;
  for (double budget : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    AllocationProblem p = base;
    p.budget = budget;
    const Allocation a = allocate_bits(p);
    CHECK(kkt_residual(p, a) < 1e-9);
    double used = 0.0;
    for (std::size_t k = 0; k < 3; ++k) used += double(p.sizes[k]) * a.bits[k];
    CHECK(used <= budget + 1e-9);
    const double value = a.objective(p);
    CHECK(value <= previous + 1e-12);
    previous = value;
  }
}

TEST_CASE("rescaling all weights leaves the argmin unchanged") {
  const AllocationProblem p{{2.0, 0.7, 1.1}, {4, 2, 5}, 6.0};
  const Allocation a = allocate_bits(p);
  for (double gamma : {0.25, 3.0, 40.0}) {
    AllocationProblem scaled = p;
    for (double& w : scaled.weights) w *= gamma;
    const Allocation b = allocate_bits(scaled);
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(b.bits[k] == doctest::Approx(a.bits[k]).epsilon(1e-9));
    CHECK(b.objective(scaled) == doctest::Approx(gamma * a.objective(p)).epsilon(1e-9));
  }
}

TEST_CASE("reverse water-filling closed forms") {
  const std::vector<double> single{1.0};
  const WaterfillResult none = reverse_waterfill(single, 1.0, 0.0);
  CHECK(none.distortions[0] == 0.5);
  CHECK(none.rate == 0.0);

  const WaterfillResult one_bit = reverse_waterfill(single, 1.0, 1.0);
  CHECK(one_bit.distortions[0] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(one_bit.rate == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero-budget distortion equals the no-coding distortion exactly") {
  const std::vector<double> sigma2{3.0, 1.0, 0.25, 0.0};
  const double eps = 0.7;
  const WaterfillResult r = reverse_waterfill(sigma2, eps, 0.0);
  for (std::size_t j = 0; j < sigma2.size(); ++j) {
    const double expected = sigma2[j] * sigma2[j] / (sigma2[j] + eps * eps);
    CHECK(r.distortions[j] == expected);
  }
}

TEST_CASE("two-coefficient water-filling matches a 400x400 grid oracle") {
  const std::vector<double> sigma2{3.0, 1.0};
  const double eps = 1.0, budget = 1.0;
  const WaterfillResult r = reverse_waterfill(sigma2, eps, budget);
  CHECK(std::fabs(r.rate - budget) < 1e-9);

  const double g1 = 9.0 / 4.0, g2 = 0.5;
  double best = HUGE_VAL;
  const int steps = 400;
  for (int i = 1; i <= steps; ++i) {
    for (int j = 1; j <= steps; ++j) {
      const double mu1 = g1 * i / steps, mu2 = g2 * j / steps;
      double rate = 0.0;
      if (g1 > mu1) rate += 0.5 * std::log2(g1 / mu1);
      if (g2 > mu2) rate += 0.5 * std::log2(g2 / mu2);
      if (rate <= budget) best = std::min(best, mu1 + mu2);
    }
  }
  const double resolution = g1 / steps + g2 / steps;
  CHECK(r.total_distortion() <= best + 1e-12);
  CHECK(best - r.total_distortion() <= resolution);
}

TEST_CASE("water-filling invariants across budgets") {
  const std::vector<double> sigma2{2.0, 1.3, 0.9, 0.4, 0.1};
  const double eps = 0.8;
  double previous = HUGE_VAL;
  for (double budget : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const WaterfillResult r = reverse_waterfill(sigma2, eps, budget);
    CHECK(r.rate <= budget + 1e-9);
    for (std::size_t j = 0; j < sigma2.size(); ++j) {
      const double g = sigma2[j] * sigma2[j] / (sigma2[j] + eps * eps);
      CHECK(r.distortions[j] == std::min(r.level, g));
    }
    const double total = r.total_distortion();
    CHECK(total <= previous + 1e-12);
    previous = total;
  }
}

TEST_SUITE_END();
