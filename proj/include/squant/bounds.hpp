// Theoretical risk constants for quantized estimation over Sobolev ellipsoids:
// Pinsker's constant, the insufficient-regime constant and its achieving
// sequence, and the sufficient-regime constant via a variational problem.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace squant {

enum class Regime { over_sufficient, sufficient, insufficient };

const char* regime_name(Regime r);

// (c^2 (2m+1) / pi^{2m})^{1/(2m+1)} (m/(m+1))^{2m/(2m+1)}; leading constant of
// the unquantized minimax risk at rate eps^{4m/(2m+1)}.
double pinsker_constant(double m, double c);

// c^2 m^{2m} / pi^{2m}; leading constant of the quantized minimax risk at rate
// B^{-2m} when the budget is insufficient.
double insufficient_constant(double m, double c);

// The unique J with J^J/J! < exp(B/m) <= (J+1)^{J+1}/(J+1)!, evaluated with
// log-domain factorials. B is in the natural-log units of the bound analysis.
std::size_t optimal_support_size(double budget, double m);

struct AchievingSequence {
  std::vector<double> sigma2;  // kept prefix of the achieving variances
  std::size_t support;         // J', kept length
  std::size_t truncation;      // J_eps
  double value;                // attained lower-bound value J' * sigma2_{J_eps}
};

// sigma2_j = (c^2/pi^{2m}) / (J_eps a_j^2) truncated to the largest prefix with
// sigma_j^4/(sigma_j^2 + eps^2) >= sigma2_{J_eps}.
AchievingSequence insufficient_achieving_sequence(double budget, double m, double c,
                                                  double epsilon);

// Solution of the limiting variational problem on [0, x0]:
//   maximize  int sigma^2/(sigma^2+1) dx + x0 * alpha
//   where     alpha = exp( (1/x0) int log(sigma^4/(sigma^2+1)) dx - 2d/x0 ),
//   subject to int x^{2m} sigma^2 dx <= c^2/pi^{2m},
//             sigma^2 nonincreasing, sigma^4/(sigma^2+1) >= alpha on (0, x0].
// The stationary profile solves, pointwise in x,
//   1/(sigma^2+1)^2 + alpha (sigma^2+2)/(sigma^2 (sigma^2+1)) = lambda x^{2m},
// i.e. sigma^2(x) is the unique positive root of
//   w y^3 + (2w - alpha) y^2 + (w - 3 alpha - 1) y - 2 alpha,  w = lambda x^{2m}.
struct VariationalSolution {
  double m = 0.0, c = 0.0, d = 0.0;
  double x0 = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  double value = 0.0;              // V = estimation_term + quantization_term
  double estimation_term = 0.0;    // int sigma^2/(sigma^2+1) dx
  double quantization_term = 0.0;  // x0 * alpha
  std::vector<double> grid;        // uniform grid over [0, x0] (cell midpoints)
  std::vector<double> sigma2;      // profile on that grid
  bool multiple_local_optima = false;
  int iterations = 0;
  double residual = 0.0;  // last fixed-point residual on log(alpha)
};

// Unique positive root of the stationarity cubic for w = lambda x^{2m} > 0.
double variational_profile_root(double w, double alpha);

VariationalSolution solve_variational(double m, double c, double d, std::size_t grid_size = 2048);

struct RiskBound {
  double value;              // estimation_term + quantization_term
  double estimation_term;    // P_{m,c} eps^{4m/(2m+1)}
  double quantization_term;  // (c^2 m^{2m}/pi^{2m}) B^{-2m}
  Regime regime;
};

// Closed-form two-term upper bound on the quantized minimax risk, with the
// regime classified by the ratio B * eps^{2/(2m+1)} (decade cutoffs).
RiskBound risk_upper_bound(double epsilon, double budget, double m, double c);

Regime classify_regime(double epsilon, double budget, double m);

}  // namespace squant
