// Counter-based random number generation.
//
// Every draw is a pure function of (key, words...): no state is carried
// between calls, so any coordinate of any replicate can be regenerated
// independently and the same inputs always give bitwise-identical output.

#pragma once

#include <cmath>
#include <cstdint>

namespace squant::rng {

inline constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += golden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Absorbs one key word into a hash state.
constexpr std::uint64_t absorb(std::uint64_t h, std::uint64_t word) noexcept {
  h ^= mix64(word + golden);
  h *= 0xd1342543de82ef95ULL;
  return mix64(h);
}

constexpr std::uint64_t word(std::uint64_t key, std::uint64_t stream, std::uint64_t index) noexcept {
  return absorb(absorb(key, stream), index);
}

// Uniform draw in the open interval (0, 1); the forced low bit keeps the
// value an exact odd multiple of 2^-53, bounded away from both endpoints.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) | 1u) * 0x1.0p-53;
}

constexpr double uniform(std::uint64_t key, std::uint64_t stream, std::uint64_t index) noexcept {
  return to_unit(word(key, stream, index));
}

// Inverse standard-normal CDF: Acklam's rational approximation refined by one
// Halley step, accurate to near machine precision over (0, 1).
inline double normal_quantile(double p) noexcept {
  constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                           -2.759285104469687e+02, 1.383577518672690e+02,
                           -3.066479806614716e+01, 2.506628277459239e+00};
  constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                           -1.556989798598866e+02, 6.680131188771972e+01,
                           -1.328068155288572e+01};
  constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                           -2.400758277161838e+00, -2.549732539343734e+00,
                           4.374664141464968e+00,  2.938163982698783e+00};
  constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

inline double normal(std::uint64_t key, std::uint64_t stream, std::uint64_t index) noexcept {
  return normal_quantile(uniform(key, stream, index));
}

}  // namespace squant::rng
