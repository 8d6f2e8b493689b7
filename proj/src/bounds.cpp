#include "squant/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace squant {

namespace {

double squared_radius(double m, double c) { return c * c / std::pow(M_PI, 2.0 * m); }

void check_class(double m, double c) {
  if (!(m > 0.0) || !(c > 0.0))
    throw std::invalid_argument("smoothness and radius must be positive");
}

// J ln J - ln J!; strictly increasing in J.
double support_score(std::size_t j) {
  const double jd = static_cast<double>(j);
  return jd * std::log(jd) - std::lgamma(jd + 1.0);
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::over_sufficient:
      return "over-sufficient";
    case Regime::sufficient:
      return "sufficient";
    case Regime::insufficient:
      return "insufficient";
  }
  return "unknown";
}

double pinsker_constant(double m, double c) {
  check_class(m, c);
  const double q = squared_radius(m, c);
  return std::pow(q * (2.0 * m + 1.0), 1.0 / (2.0 * m + 1.0)) *
         std::pow(m / (m + 1.0), 2.0 * m / (2.0 * m + 1.0));
}

double insufficient_constant(double m, double c) {
  check_class(m, c);
  return c * c * std::pow(m, 2.0 * m) / std::pow(M_PI, 2.0 * m);
}

std::size_t optimal_support_size(double budget, double m) {
  if (!(budget > 0.0) || !(m > 0.0))
    throw std::invalid_argument("optimal_support_size: budget and m must be positive");
  const double target = budget / m;
  // support_score(J) ~ J - log-order terms, so target + slack brackets the answer.
  std::size_t hi = static_cast<std::size_t>(std::ceil(target)) + 4;
  hi += 2 * static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(hi) + 8.0)));
  while (support_score(hi) < target) hi *= 2;
  std::size_t lo = 1;  // support_score(1) = 0 < target
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (support_score(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

AchievingSequence insufficient_achieving_sequence(double budget, double m, double c,
                                                  double epsilon) {
  check_class(m, c);
  if (!(epsilon > 0.0))
    throw std::invalid_argument("insufficient_achieving_sequence: epsilon must be positive");
  const std::size_t truncation = optimal_support_size(budget, m);
  const double q = squared_radius(m, c);
  const double eps2 = epsilon * epsilon;
  const double tail =
      q / (static_cast<double>(truncation) * std::pow(static_cast<double>(truncation), 2.0 * m));

  AchievingSequence out;
  out.truncation = truncation;
  out.support = 0;
  for (std::size_t j = 1; j <= truncation; ++j) {
    const double s2 =
        q / (static_cast<double>(truncation) * std::pow(static_cast<double>(j), 2.0 * m));
    if (s2 * s2 / (s2 + eps2) < tail) break;
    out.sigma2.push_back(s2);
    out.support = j;
  }
  out.value = static_cast<double>(out.support) * tail;
  return out;
}

double variational_profile_root(double w, double alpha) {
  if (!(w > 0.0) || !(alpha >= 0.0))
    throw std::invalid_argument("variational_profile_root: need w > 0 and alpha >= 0");
  if (alpha == 0.0) return w < 1.0 ? 1.0 / std::sqrt(w) - 1.0 : 0.0;

  const auto p = [&](double y) {
    return ((w * y + (2.0 * w - alpha)) * y + (w - 3.0 * alpha - 1.0)) * y - 2.0 * alpha;
  };
  const auto dp = [&](double y) {
    return (3.0 * w * y + 2.0 * (2.0 * w - alpha)) * y + (w - 3.0 * alpha - 1.0);
  };

  // p(0) = -2 alpha < 0and p -> +inf; bracket the single positive crossing.
  double lo = 0.0;
  double hi = 2.0 * (alpha / w + 1.0 / std::sqrt(w) + 1.0);
  while (p(hi) <= 0.0) hi *= 2.0;

  double y = std::fmin(hi, std::fmax(alpha / w, 1e-12));
  for (int iter = 0; iter < 200; ++iter) {
    const double value = p(y);
    if (value > 0.0)
      hi = y;
    else
      lo = y;
    const double slope = dp(y);
    double next = (slope > 0.0) ? y - value / slope : -1.0;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - y) <= 1e-15 * std::fmax(next, 1e-300)) return next;
    y = next;
  }
  return y;
}

namespace {

struct ProfilePass {
  double moment = 0.0;       // int x^{2m} sigma^2 dx
  double moment_slope = 0.0; // d moment / d lambda
  double estimation = 0.0;   // int sigma^2/(sigma^2+1) dx
  double log_mean = 0.0;     // (1/x0) int log(sigma^4/(sigma^2+1)) dx
};

// Midpoint-rule sweep over the profile; midpoints avoid the integrable
// log singularity at x = 0.
ProfilePass sweep_profile(double m, double alpha, double lambda, double x0, std::size_t cells,
                          std::vector<double>* table) {
  const double h = x0 / static_cast<double>(cells);
  ProfilePass acc;
  double y = -1.0;  // warm start along the grid; the profile is smooth in x
  for (std::size_t i = 0; i < cells; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * h;
    const double xm = std::pow(x, 2.0 * m);
    const double w = lambda * xm;
    y = variational_profile_root(w, alpha);
    if (table) (*table)[i] = y;
    acc.moment += xm * y;
    const double dpdy =
        (3.0 * w * y + 2.0 * (2.0 * w - alpha)) * y + (w - 3.0 * alpha - 1.0);
    acc.moment_slope -= xm * xm * y * (y + 1.0) * (y + 1.0) / dpdy;
    acc.estimation += y / (y + 1.0);
    acc.log_mean += 2.0 * std::log(y) - std::log1p(y);
  }
  acc.moment *= h;
  acc.moment_slope *= h;
  acc.estimation *= h;
  acc.log_mean /= static_cast<double>(cells);
  return acc;
}

// Finds lambda > 0 matching the moment constraint for fixed (alpha, x0).
// Safeguarded Newton; the moment is strictly decreasing in lambda.
double solve_lambda(double m, double alpha, double x0, std::size_t cells, double target,
                    double warm_start) {
  double lambda = warm_start > 0.0 ? warm_start : 1.0;
  double lo = 0.0, hi = HUGE_VAL;
  for (int iter = 0; iter < 200; ++iter) {
    const ProfilePass pass = sweep_profile(m, alpha, lambda, x0, cells, nullptr);
    const double gap = pass.moment - target;
    if (std::fabs(gap) <= 1e-12 * target) return lambda;
    if (gap > 0.0)
      lo = lambda;  // moment too large: lambda must grow
    else
      hi = lambda;
    double next = lambda - gap / pass.moment_slope;
    if (!(next > lo) || !(next < hi) || !std::isfinite(next))
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : lambda * 4.0;
    if (std::fabs(next - lambda) <= 1e-15 * lambda) return next;
    lambda = next;
  }
  return lambda;
}

struct InnerSolution {
  double alpha = 0.0;
  double lambda = 0.0;
  double value = 0.0;
  double estimation = 0.0;
  bool feasible = false;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

// Fixed point on alpha for a fixed support endpoint x0: the profile comes from
// the stationarity cubic, lambda is tuned to the moment constraint, and alpha
// is updated toward its defining functional with log-space damping 0.5.
InnerSolution solve_for_endpoint(double m, double d, double q, double x0, std::size_t cells,
                                 int max_iterations, double tol) {
  // Initial iterate from the Pinsker-shaped profile rho ((x0/x)^m - 1) scaled
  // to spend the full moment budget; exact in the d -> infinity limit.
  const double rho =
      q * (m + 1.0) * (2.0 * m + 1.0) / (m * std::pow(x0, 2.0 * m + 1.0));
  double log_mean = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(cells);
    const double s = rho * (std::pow(u, -m) - 1.0);
    log_mean += 2.0 * std::log(s) - std::log1p(s);
  }
  log_mean /= static_cast<double>(cells);

  InnerSolution out;
  double log_alpha = log_mean - 2.0 * d / x0;
  double lambda = -1.0;
  for (int iter = 0; iter < max_iterations; ++iter) {
    const double alpha = std::exp(std::fmax(log_alpha, -700.0));
    lambda = solve_lambda(m, alpha, x0, cells, q, lambda);
    const ProfilePass pass = sweep_profile(m, alpha, lambda, x0, cells, nullptr);
    const double log_next = pass.log_mean - 2.0 * d / x0;
    out.residual = std::fabs(log_next - log_alpha);
    out.iterations = iter + 1;
    log_alpha = 0.5 * (log_alpha + log_next);
    if (out.residual < tol) {
      out.alpha = std::exp(log_alpha);
      out.lambda = solve_lambda(m, out.alpha, x0, cells, q, lambda);
      const ProfilePass final_pass = sweep_profile(m, out.alpha, out.lambda, x0, cells, nullptr);
      out.estimation = final_pass.estimation;
      out.value = final_pass.estimation + x0 * out.alpha;
      // Feasibility of the last constraint at the support endpoint, where the
      // nonincreasing profile makes sigma^4/(sigma^2+1) smallest.
      const double edge = variational_profile_root(out.lambda * std::pow(x0, 2.0 * m), out.alpha);
      out.feasible = edge * edge / (edge + 1.0) >= out.alpha * (1.0 - 1e-9);
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace

VariationalSolution solve_variational(double m, double c, double d, std::size_t grid_size) {
  check_class(m, c);
  if (!(d > 0.0)) throw std::invalid_argument("solve_variational: d must be positive");
  if (grid_size < 256) throw std::invalid_argument("solve_variational: grid_size must be >= 256");

  const double q = squared_radius(m, c);
  const double scale =
      std::pow(q * (m + 1.0) * (2.0 * m + 1.0) / m, 1.0 / (2.0 * m + 1.0));
  constexpr int fixed_point_cap = 200;
  constexpr double fixed_point_tol = 1e-8;

  // Coarse scan over candidate endpoints, then golden-section refinement.
  const std::size_t scan_cells = std::max<std::size_t>(256, grid_size / 4);
  const int scan_points = 48;
  const double lo_x0 = 1e-3 * scale;
  const double hi_x0 = 10.0 * scale;
  std::vector<double> xs(scan_points), fs(scan_points, -HUGE_VAL);
  double last_residual = 0.0;
  for (int i = 0; i < scan_points; ++i) {
    const double t = static_cast<double>(i) / (scan_points - 1);
    xs[i] = lo_x0 * std::pow(hi_x0 / lo_x0, t);
    const InnerSolution sol =
        solve_for_endpoint(m, d, q, xs[i], scan_cells, fixed_point_cap, fixed_point_tol);
    last_residual = sol.residual;
    if (sol.converged && sol.feasible) fs[i] = sol.value;
  }
  int best = -1;
  for (int i = 0; i < scan_points; ++i)
    if (best < 0 || fs[i] > fs[best]) best = i;
  if (best < 0 || fs[best] == -HUGE_VAL)
    throw std::runtime_error("solve_variational: no feasible endpoint found (last residual " +
                             std::to_string(last_residual) + ")");

  bool multiple = false;
  for (int i = 1; i + 1 < scan_points; ++i) {
    if (fs[i] == -HUGE_VAL || i == best) continue;
    const bool local_max = fs[i] > fs[i - 1] && fs[i] > fs[i + 1];
    if (local_max && fs[best] - fs[i] > 1e-6 * std::fabs(fs[best])) multiple = true;
  }

  double bracket_lo = xs[std::max(best - 1, 0)];
  double bracket_hi = xs[std::min(best + 1, scan_points - 1)];
  const auto objective = [&](double x0) {
    const InnerSolution sol =
        solve_for_endpoint(m, d, q, x0, grid_size, fixed_point_cap, fixed_point_tol);
    return (sol.converged && sol.feasible) ? sol.value : -HUGE_VAL;
  };
  constexpr double inv_phi = 0.6180339887498949;
  double a = bracket_lo, b = bracket_hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  for (int iter = 0; iter < 48 && (b - a) > 1e-10 * b; ++iter) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    }
  }
  const double x0 = 0.5 * (a + b);

  const InnerSolution sol =
      solve_for_endpoint(m, d, q, x0, grid_size, fixed_point_cap, fixed_point_tol);
  if (!sol.converged)
    throw std::runtime_error("solve_variational: fixed point did not converge (last residual " +
                             std::to_string(sol.residual) + ")");

  VariationalSolution out;
  out.m = m;
  out.c = c;
  out.d = d;
  out.x0 = x0;
  out.alpha = sol.alpha;
  out.lambda = sol.lambda;
  out.estimation_term = sol.estimation;
  out.quantization_term = x0 * sol.alpha;
  out.value = sol.value;
  out.multiple_local_optima = multiple;
  out.iterations = sol.iterations;
  out.residual = sol.residual;
  out.grid.resize(grid_size);
  out.sigma2.resize(grid_size);
  const double h = x0 / static_cast<double>(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i)
    out.grid[i] = (static_cast<double>(i) + 0.5) * h;
  sweep_profile(m, sol.alpha, sol.lambda, x0, grid_size, &out.sigma2);
  return out;
}

Regime classify_regime(double epsilon, double budget, double m) {
  if (!(epsilon > 0.0) || !(budget > 0.0) || !(m > 0.0))
    throw std::invalid_argument("classify_regime: all arguments must be positive");
  const double ratio = budget * std::pow(epsilon, 2.0 / (2.0 * m + 1.0));
  if (ratio >= 10.0) return Regime::over_sufficient;
  if (ratio <= 0.1) return Regime::insufficient;
  return Regime::sufficient;
}

RiskBound risk_upper_bound(double epsilon, double budget, double m, double c) {
  check_class(m, c);
  if (!(epsilon > 0.0) || !(budget > 0.0))
    throw std::invalid_argument("risk_upper_bound: epsilon and budget must be positive");
  RiskBound out{};
  out.estimation_term =
      pinsker_constant(m, c) * std::pow(epsilon, 4.0 * m / (2.0 * m + 1.0));
  out.quantization_term = insufficient_constant(m, c) * std::pow(budget, -2.0 * m);
  out.value = out.estimation_term + out.quantization_term;
  out.regime = classify_regime(epsilon, budget, m);
  return out;
}

}  // namespace squant
