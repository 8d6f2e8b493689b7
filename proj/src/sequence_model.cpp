#include "squant/sequence_model.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "squant/rng.hpp"

namespace squant {

namespace {

constexpr std::uint64_t observation_stream = 0;

void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace

double EllipsoidParams::semiaxis(std::size_t j) const {
  return std::pow(static_cast<double>(j), m);
}

double EllipsoidParams::squared_radius() const { return c * c / std::pow(M_PI, 2.0 * m); }

double trig_basis(std::size_t j, double t) {
  if (j == 0) throw std::invalid_argument("trig_basis: index must be >= 1");
  if (j == 1) return 1.0;
  const double k = static_cast<double>(j / 2);
  const double phase = 2.0 * M_PI * k * t;
  return (j % 2 == 0) ? std::sqrt(2.0) * std::cos(phase) : std::sqrt(2.0) * std::sin(phase);
}

double damped_doppler(double t) {
  const double envelope = std::sqrt(std::fmax(t * (1.0 - t), 0.0));
  return envelope * std::sin(2.1 * M_PI / (t + 0.3));
}

CoefficientVector fourier_coefficients(const std::function<double(double)>& f, std::size_t count,
                                       std::size_t grid_points) {
  if (count == 0) throw std::invalid_argument("fourier_coefficients: count must be >= 1");
  if (grid_points < 3 || grid_points % 2 == 0)
    throw std::invalid_argument("fourier_coefficients: grid_points must be odd and >= 3");

  const std::size_t n = grid_points;
  const double h = 1.0 / static_cast<double>(n - 1);
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = f(static_cast<double>(i) * h);
    if (!std::isfinite(samples[i]))
      throw std::invalid_argument("fourier_coefficients: non-finite sample on quadrature grid");
  }

  // Composite Simpson weights: 1, 4, 2, ..., 4, 1 times h/3.
  CoefficientVector theta(count, 0.0);
  for (std::size_t j = 1; j <= count; ++j) {
    double acc = samples[0] * trig_basis(j, 0.0) + samples[n - 1] * trig_basis(j, 1.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double w = (i % 2 == 1) ? 4.0 : 2.0;
      acc += w * samples[i] * trig_basis(j, static_cast<double>(i) * h);
    }
    theta[j - 1] = acc * h / 3.0;
  }
  return theta;
}

CoefficientVector fourier_coefficients_stable(const std::function<double(double)>& f,
                                              std::size_t count, double tol, int max_doublings) {
  std::size_t points = default_quadrature_points;
  CoefficientVector current = fourier_coefficients(f, count, points);
  for (int pass = 0; pass < max_doublings; ++pass) {
    points = 2 * (points - 1) + 1;
    CoefficientVector refined = fourier_coefficients(f, count, points);
    double delta = 0.0;
    for (std::size_t j = 0; j < count; ++j) delta = std::fmax(delta, std::fabs(refined[j] - current[j]));
    current = std::move(refined);
    if (delta < tol) return current;
  }
  throw std::runtime_error("fourier_coefficients_stable: quadrature did not stabilize");
}

CoefficientVector fourier_coefficients_fft(const std::function<double(double)>& f,
                                           std::size_t count) {
  if (count == 0) throw std::invalid_argument("fourier_coefficients_fft: count must be >= 1");
  // The floor keeps rectangle-rule aliasing below 1e-9 even for integrands
  // with square-root endpoint behavior.
  std::size_t grid = 1u << 19;
  while (grid < 8 * count) grid <<= 1;

  std::vector<std::complex<double>> samples(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    const double v = f(static_cast<double>(i) / static_cast<double>(grid));
    if (!std::isfinite(v))
      throw std::invalid_argument("fourier_coefficients_fft: non-finite sample on quadrature grid");
    samples[i] = v;
  }
  fft_inplace(samples);

  const double scale = 1.0 / static_cast<double>(grid);
  CoefficientVector theta(count);
  theta[0] = samples[0].real() * scale;
  for (std::size_t j = 2; j <= count; ++j) {
    const std::size_t k = j / 2;
    const std::complex<double> ck = samples[k] * scale;
    theta[j - 1] = (j % 2 == 0) ? std::sqrt(2.0) * ck.real() : -std::sqrt(2.0) * ck.imag();
  }
  return theta;
}

double ellipsoid_norm(const CoefficientVector& theta, const EllipsoidParams& params) {
  double acc = 0.0;
  for (std::size_t j = 1; j <= theta.size(); ++j) {
    const double a = params.semiaxis(j);
    acc += a * a * theta[j - 1] * theta[j - 1];
  }
  return acc;
}

std::size_t sequence_length(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::invalid_argument("sequence_length: epsilon must lie in (0, 1)");
  const double inv = 1.0 / (epsilon * epsilon);
  return static_cast<std::size_t>(std::floor(inv * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())));
}

ObservedSequence sample_observation(const CoefficientVector& theta, double epsilon,
                                    std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("sample_observation: epsilon must be positive");
  const std::size_t n = sequence_length(epsilon);
  ObservedSequence out{std::vector<double>(n), epsilon};
  for (std::size_t j = 1; j <= n; ++j) {
    const double mean = (j <= theta.size()) ? theta[j - 1] : 0.0;
    out.values[j - 1] = mean + epsilon * rng::normal(seed, observation_stream, j);
  }
  return out;
}

std::vector<double> synthesize(const CoefficientVector& theta, const std::vector<double>& grid) {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= theta.size(); ++j) acc += theta[j - 1] * trig_basis(j, grid[i]);
    out[i] = acc;
  }
  return out;
}

}  // namespace squant
