#pragma once

// Maximal-area inscribed (John) ellipse of a planar convex body and the
// two-sided bound of the total L_p dual curvature measure by the John
// radii.

#include <optional>

#include "s1mk/convex_body.hpp"
#include "s1mk/error.hpp"

namespace s1mk {

struct Ellipse {
  Vec2 center = Vec2::Zero();
  double r1 = 1.0;  // r1 >= r2 > 0
  double r2 = 1.0;
  double angle = 0.0;  // direction of the r1 axis, in [0, π)

  /// Symmetric positive definite B with E = {B v + center : |v| <= 1}.
  Eigen::Matrix2d shape() const;
  static Ellipse from_shape(const Eigen::Matrix2d& b, const Vec2& center);
};

/// Containment of the body relative to E and 2E, measured along rays from
/// the ellipse center. Distances are signed and in body units.
struct ContainmentCertificate {
  double diameter = 0.0;
  /// max_i (|B u_i| + u_i·c - h_i); <= 0 means E lies in every supporting
  /// half-plane.
  double max_constraint_violation = 0.0;
  /// min over boundary points of the distance outside E (>= 0 ideally).
  double min_outside_e = 0.0;
  /// max over boundary points of the distance outside 2E (<= 0 ideally).
  double max_outside_2e = 0.0;
  /// max over boundary points of |B^{-1}(x - c)|; K ⊆ s E about c for
  /// s >= this value.
  double containment_factor = 0.0;
  bool e_in_k = false;
  bool k_in_2e = false;
};

struct JohnOptions {
  double gap_tol = 1e-10;  // barrier duality gap m/τ at termination
  int max_iter = 2000;     // total Newton iterations
  /// When set, the center is fixed (e.g. at the centroid) and only the
  /// shape is optimized.
  std::optional<Vec2> fixed_center;
};

struct JohnResult {
  Ellipse ellipse;
  ContainmentCertificate certificate;
  int iterations = 0;
};

class JohnFailure : public Error {
 public:
  JohnFailure(const std::string& what, Ellipse best)
      : Error(ErrorCode::numerical_failure, what), best_(best) {}
  const Ellipse& best_iterate() const noexcept { return best_; }

 private:
  Ellipse best_;
};

/// Maximum-area ellipse inside the intersection of the supporting half-planes
/// {x : u_i·x <= h_i} of the body, by a log-barrier Newton method.
JohnResult john(const SupportFunction& body, const JohnOptions& options = {});

/// The same program with the center pinned to centroid(body).
JohnResult john_centroid(const SupportFunction& body, const JohnOptions& options = {});

ContainmentCertificate certify(const SupportFunction& body, const Ellipse& e);

/// c2 = 2^{2q-1-3p/2} π.
double sandwich_upper_constant(double p, double q);

struct SandwichConfig {
  double c1_floor = 1e-3;
  double upper_rel_tol = 1e-9;
};

struct SandwichReport {
  double ratio = 0.0;
  bool lower_ok = false;
  bool upper_ok = false;
  double c2 = 0.0;
  double total = 0.0;        // C~_{p,q}(K, S¹)
  double denominator = 0.0;  // (r1 r2)^{1-p} (r1² + r2²)^{(p+q-2)/2}
  double r1 = 0.0;
  double r2 = 0.0;
};

/// Requires p in [0, 1] and q >= 2.
SandwichReport sandwich_ratio(const SupportFunction& body, double p, double q,
                              const SandwichConfig& config = {});
SandwichReport sandwich_ratio(const SupportFunction& body, const Ellipse& john_ellipse, double p,
                              double q, const SandwichConfig& config = {});

}  // namespace s1mk
