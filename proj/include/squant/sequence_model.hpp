// Gaussian sequence model on [0,1]: trigonometric basis, Fourier analysis and
// synthesis, Sobolev ellipsoid geometry, and seeded observation sampling.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace squant {

using CoefficientVector = std::vector<double>;

// Sobolev ellipsoid parameters: semiaxes a_j = j^m, coefficient sequences
// belong to the ellipsoid iff sum_j a_j^2 theta_j^2 <= c^2 / pi^{2m}.
struct EllipsoidParams {
  double m;  // smoothness order, > 0
  double c;  // radius, > 0

  double semiaxis(std::size_t j) const;
  double squared_radius() const;  // c^2 / pi^{2m}
};

struct ObservedSequence {
  std::vector<double> values;  // Y_1..Y_N
  double epsilon;              // noise standard deviation
};

// Orthonormal trigonometric basis on [0,1]:
//   phi_1 = 1, phi_{2k} = sqrt(2) cos(2 pi k t), phi_{2k+1} = sqrt(2) sin(2 pi k t).
// j is 1-based; j = 0 is rejected.
double trig_basis(std::size_t j, double t);

// sqrt(t(1-t)) * sin(2.1 pi / (t + 0.3)) on [0,1].
double damped_doppler(double t);

inline constexpr std::size_t default_quadrature_points = (1u << 14) + 1;

// First `count` Fourier coefficients of f by composite Simpson quadrature on a
// uniform grid (odd point count required). Rejects non-finite samples.
CoefficientVector fourier_coefficients(const std::function<double(double)>& f, std::size_t count,
                                       std::size_t grid_points = default_quadrature_points);

// Grid-doubling variant: starts from default_quadrature_points and doubles the
// panel count until successive coefficient vectors agree within `tol` in the
// max norm. Used where quadrature error must be certified rather than assumed.
CoefficientVector fourier_coefficients_stable(const std::function<double(double)>& f,
                                              std::size_t count, double tol = 1e-9,
                                              int max_doublings = 8);

// FFT-backed trapezoid quadrature for large coefficient counts (the direct
// Simpson path is O(grid * count)). Exact for trigonometric polynomials below
// the Nyquist index; the grid oversamples `count` by 8x.
CoefficientVector fourier_coefficients_fft(const std::function<double(double)>& f,
                                           std::size_t count);

// sum_j a_j^2 theta_j^2.
double ellipsoid_norm(const CoefficientVector& theta, const EllipsoidParams& params);

// N = floor(1/eps^2), with a tiny relative nudge so that eps = 1/sqrt(n)
// computed in floating point yields exactly n.
std::size_t sequence_length(double epsilon);

// Y_j = theta_j + eps * Z_j for j = 1..sequence_length(eps), Z_j standard
// normal from the counter-based generator; theta is zero-padded/truncated.
ObservedSequence sample_observation(const CoefficientVector& theta, double epsilon,
                                    std::uint64_t seed);

// Pointwise sums sum_j theta_j phi_j(t) over the grid.
std::vector<double> synthesize(const CoefficientVector& theta, const std::vector<double>& grid);

}  // namespace squant
