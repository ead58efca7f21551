#pragma once

// Reference computations that do not go through the library's
// discretization: composite Simpson quadrature on fine meshes and closed
// forms.

#include <cmath>
#include <functional>

namespace s1mk::testing {

inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 200000) {
  if (n % 2) ++n;
  const double dx = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * dx);
  return s * dx / 3.0;
}

/// Perimeter of the ellipse with semi-axes a, b by arc-length quadrature of
/// the parametrization (a cos t, b sin t).
inline double ellipse_perimeter(double a, double b) {
  return simpson(
      [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); }, 0.0,
      2.0 * 3.14159265358979323846);
}

}  // namespace s1mk::testing
