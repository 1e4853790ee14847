#pragma once

#include <cmath>
#include <stdexcept>

namespace sscox {

// Scaled Bernoulli polynomials on [0,1]:
//   k1(t) = t - 1/2
//   k2(t) = (k1(t)^2 - 1/12) / 2
//   k4(t) = (k1(t)^4 - k1(t)^2/2 + 7/240) / 24
// They build the cubic-spline reproducing kernel below; each integrates to
// zero over [0,1], which keeps every basis column mean-centered on the domain.
inline double bernoulli_k1(double t) { return t - 0.5; }

inline double bernoulli_k2(double t) {
  const double k1 = t - 0.5;
  return 0.5 * (k1 * k1 - 1.0 / 12.0);
}

inline double bernoulli_k4(double t) {
  const double k1 = t - 0.5;
  const double s = k1 * k1;
  return (s * s - 0.5 * s + 7.0 / 240.0) / 24.0;
}

// Cubic-spline reproducing kernel on [0,1]^2:
//   R(x, y) = k2(x) k2(y) - k4(|x - y|)
inline double cubic_kernel(double x, double y) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw std::domain_error("cubic_kernel arguments must lie in [0,1]");
  }
  return bernoulli_k2(x) * bernoulli_k2(y) - bernoulli_k4(std::abs(x - y));
}

}  // namespace sscox
