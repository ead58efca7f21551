#pragma once

// Planar convex bodies containing the origin, represented by sampled support
// functions h(θ) = max{u(θ)·x : x ∈ K}, u(θ) = (cos θ, sin θ).

#include <vector>

#include <Eigen/Dense>

#include "s1mk/circle_grid.hpp"

namespace s1mk {

using Vec2 = Eigen::Vector2d;

inline Vec2 unit(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Default convexity slack: 1e-9 * max(h).
double default_tol_convex(const Eigen::VectorXd& h);

class SupportFunction {
 public:
  /// Validates h >= 0 and h'' + h >= -tol_convex. A negative tol_convex
  /// selects default_tol_convex.
  static SupportFunction from_samples(const Eigen::VectorXd& values, const Grid& grid,
                                      double tol_convex = -1.0);
  static SupportFunction from_samples(const PeriodicSamples& h, double tol_convex = -1.0);

  /// Skips validation. For support functions that are valid by construction
  /// (sums of support functions, iterates already checked elsewhere).
  static SupportFunction trusted(const PeriodicSamples& h);

  const Grid& grid() const noexcept { return h_.grid(); }
  const PeriodicSamples& samples() const noexcept { return h_; }
  const Eigen::VectorXd& h() const noexcept { return h_.values(); }
  const Eigen::VectorXd& dh() const noexcept { return dh_; }
  const Eigen::VectorXd& d2h() const noexcept { return d2h_; }
  /// h'' + h, the radius of curvature as a function of the normal angle.
  Eigen::VectorXd curvature_radius() const { return d2h_ + h_.values(); }

  double min_h() const { return h_.min(); }
  double max_h() const { return h_.max(); }
  double min_curvature() const { return curvature_radius().minCoeff(); }

 private:
  explicit SupportFunction(PeriodicSamples h);

  PeriodicSamples h_;
  Eigen::VectorXd dh_;
  Eigen::VectorXd d2h_;
};

struct BoundaryPoint {
  Vec2 x;
  double normal_angle;
};

struct BoundaryTrace {
  std::vector<BoundaryPoint> points;
  /// Set when h'' + h <= tol somewhere; points are still emitted.
  bool degenerate = false;
  double min_curvature = 0.0;
};

// Constructors for standard bodies.
SupportFunction disk(const Grid& grid, double radius, const Vec2& center = Vec2::Zero());
/// Ellipse with semi-axes a (along `angle`) and b.
SupportFunction ellipse(const Grid& grid, double a, double b, double angle = 0.0,
                        const Vec2& center = Vec2::Zero());
SupportFunction translated(const SupportFunction& body, const Vec2& offset);
SupportFunction scaled(const SupportFunction& body, double factor);
/// Rotates the body counterclockwise by phi (via trigonometric interpolation).
SupportFunction rotated(const SupportFunction& body, double phi);
SupportFunction resampled(const SupportFunction& body, const Grid& grid);

/// Boundary point with outer normal u(θ): h u + h' u⊥, counterclockwise.
BoundaryTrace boundary(const SupportFunction& body);

/// Radial function ρ(ξ) = max{λ : λξ ∈ K} sampled on out_grid directions.
PeriodicSamples radial(const SupportFunction& body, const Grid& out_grid);
PeriodicSamples radial(const SupportFunction& body);
/// ρ at arbitrary directions.
std::vector<double> radial(const SupportFunction& body, const std::vector<double>& directions);

/// √(h² + h'²): distance from the origin to the boundary point with normal u.
PeriodicSamples rho_at_normal(const SupportFunction& body);

double area(const SupportFunction& body);
double perimeter(const SupportFunction& body);
double diameter(const SupportFunction& body);
Vec2 centroid(const SupportFunction& body);

/// K + tL.
SupportFunction minkowski_sum(const SupportFunction& k, const SupportFunction& l, double t);
/// Firey combination with support function (h_K^p + t h_L^p)^{1/p}, p >= 1.
SupportFunction p_sum(const SupportFunction& k, const SupportFunction& l, double t, double p);

}  // namespace s1mk
