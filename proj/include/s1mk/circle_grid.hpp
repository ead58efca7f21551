#pragma once

// Uniform periodic discretization of the unit circle: spectral or
// central-difference differentiation, rectangle-rule quadrature and
// trigonometric interpolation.

#include <array>
#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace s1mk {

enum class DiffScheme { spectral, central };

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

class Grid {
 public:
  /// n_points must be even and at least 16.
  explicit Grid(int n_points = 256, DiffScheme scheme = DiffScheme::spectral);

  int size() const noexcept { return n_; }
  double spacing() const noexcept { return kTwoPi / n_; }
  double theta(int i) const noexcept { return spacing() * i; }
  const Eigen::VectorXd& thetas() const;
  DiffScheme scheme() const noexcept { return scheme_; }

  /// Dense differentiation matrix of order 1 or 2, built on first use and
  /// shared between copies of the grid.
  const Eigen::MatrixXd& diff_matrix(int order) const;

  /// Same resolution and scheme.
  bool operator==(const Grid& other) const noexcept {
    return n_ == other.n_ && scheme_ == other.scheme_;
  }

 private:
  struct Cache;

  int n_;
  DiffScheme scheme_;
  std::shared_ptr<Cache> cache_;
};

class PeriodicSamples {
 public:
  PeriodicSamples(Grid grid, Eigen::VectorXd values);

  template <class F>
  static PeriodicSamples from_function(const Grid& grid, F&& f) {
    Eigen::VectorXd v(grid.size());
    for (int i = 0; i < grid.size(); ++i) v[i] = f(grid.theta(i));
    return PeriodicSamples(grid, std::move(v));
  }

  static PeriodicSamples constant(const Grid& grid, double value) {
    return PeriodicSamples(grid, Eigen::VectorXd::Constant(grid.size(), value));
  }

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  int size() const noexcept { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }

  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }

 private:
  Grid grid_;
  Eigen::VectorXd values_;
};

/// Derivative of the given order (1 or 2) using the grid's scheme. For the
/// spectral scheme this is the derivative of the trigonometric interpolant;
/// it is exact for trigonometric polynomials of degree < n/2.
PeriodicSamples diff(const PeriodicSamples& samples, int order);

/// Raw-vector form used by the hot loops of the solver.
Eigen::VectorXd diff(const Grid& grid, const Eigen::VectorXd& values, int order);

/// Rectangle rule on the periodic grid.
double integrate(const PeriodicSamples& samples);
double integrate(const Grid& grid, const Eigen::VectorXd& values);

/// Discrete Hölder seminorm max |f_i - f_j| / d(θ_i, θ_j)^alpha with the
/// geodesic distance on the circle.
double holder_seminorm(const PeriodicSamples& samples, double alpha);

/// Trigonometric interpolant of a sampled periodic function. Evaluation is
/// O(n) per point.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const PeriodicSamples& samples);

  double operator()(double theta) const { return jet(theta)[0]; }
  double derivative(double theta, int order) const;
  /// Value, first and second derivative at theta in one pass.
  std::array<double, 3> jet(double theta) const;

  /// Samples the interpolant on another grid.
  PeriodicSamples resample(const Grid& grid) const;
  /// Samples θ ↦ g(θ - shift) on the original grid.
  PeriodicSamples shifted(double shift) const;

 private:
  Grid grid_;
  // c_k for k = 0 .. n/2; the real function is
  // c_0 + 2 Re Σ_{0<k<n/2} c_k e^{ikθ} + c_{n/2} cos(nθ/2).
  std::vector<std::complex<double>> coeffs_;
};

}  // namespace s1mk
