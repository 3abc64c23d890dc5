#pragma once

#include <cmath>
#include <numbers>

namespace terrasight::detail {

// Libm-independent sine/cosine used for hill terrain so every machine
// rasterizes and renders the same surface. Accurate to about 1 ulp for
// |x| < 1e6.

struct Reduced {
  double r;         // in [-pi/4, pi/4]
  double quadrant;  // x = r + quadrant * pi/2 (mod 2 pi), quadrant in {0, 1, 2, 3}
};

// Pure double arithmetic (no integer conversion) so loops over waves
// vectorize.
inline Reduced reduce_quadrant(double x) noexcept {
  constexpr double kHalfPiHi = 1.57079632679489655800e+00;
  constexpr double kHalfPiLo = 6.12323399573676603587e-17;
  // Round to nearest by the 1.5 * 2^52 shift (|x| < 2^50).
  constexpr double kShift = 6755399441055744.0;
  const double n = (x * (2.0 / std::numbers::pi) + kShift) - kShift;
  const double r = (x - n * kHalfPiHi) - n * kHalfPiLo;
  return {r, n - 4.0 * std::floor(n * 0.25)};
}

// Taylor polynomials on [-pi/4, pi/4]; truncation error below 1e-17.
inline double sin_poly(double r) noexcept {
  const double r2 = r * r;
  double p = -1.0 / 1307674368000.0;
  p = p * r2 + 1.0 / 6227020800.0;
  p = p * r2 - 1.0 / 39916800.0;
  p = p * r2 + 1.0 / 362880.0;
  p = p * r2 - 1.0 / 5040.0;
  p = p * r2 + 1.0 / 120.0;
  p = p * r2 - 1.0 / 6.0;
  return r + r * r2 * p;
}

inline double cos_poly(double r) noexcept {
  const double r2 = r * r;
  double p = 1.0 / 20922789888000.0;
  p = p * r2 - 1.0 / 87178291200.0;
  p = p * r2 + 1.0 / 479001600.0;
  p = p * r2 - 1.0 / 3628800.0;
  p = p * r2 + 1.0 / 40320.0;
  p = p * r2 - 1.0 / 720.0;
  p = p * r2 + 1.0 / 24.0;
  return 1.0 - 0.5 * r2 + r2 * r2 * p;
}

// Quadrant selection is arithmetic (no branches or selects) so the wave
// loops vectorize. Multiplying by 0 or 1 and adding 0 is exact.
inline void wave_sincos(double x, double& s, double& c) noexcept {
  const Reduced red = reduce_quadrant(x);
  const double sp = sin_poly(red.r);
  const double cp = cos_poly(red.r);
  const double half = std::floor(red.quadrant * 0.5);  // quadrant >= 2
  const double odd = red.quadrant - 2.0 * half;        // quadrant is 1 or 3
  const double flip = odd + half - 2.0 * odd * half;   // quadrant is 1 or 2
  s = (1.0 - 2.0 * half) * ((1.0 - odd) * sp + odd * cp);
  c = (1.0 - 2.0 * flip) * (odd * sp + (1.0 - odd) * cp);
}

inline double wave_sin(double x) noexcept {
  double s = 0.0;
  double c = 0.0;
  wave_sincos(x, s, c);
  return s;
}

inline double wave_cos(double x) noexcept {
  double s = 0.0;
  double c = 0.0;
  wave_sincos(x, s, c);
  return c;
}

}  // namespace terrasight::detail
