#pragma once

// Curvature-measure densities on the circle for smooth planar bodies:
//   S        density h'' + h
//   S_p      density h^{1-p} (h'' + h)
//   C~_q     density h (h² + h'²)^{(q-2)/2} (h'' + h)      (times 1/2, see DualNormalization)
//   C~_{p,q} density h^{1-p} (h² + h'²)^{(q-2)/2} (h'' + h)
// together with dual volumes and finite-difference checks of the
// variational formulas that define these measures.

#include <optional>
#include <string>
#include <vector>

#include "s1mk/circle_grid.hpp"
#include "s1mk/convex_body.hpp"

namespace s1mk {

enum class MeasureKind { surface, lp_surface, dual_curvature, lp_dual_curvature };

const char* to_string(MeasureKind kind);

struct MeasureDensity {
  PeriodicSamples density;
  double total = 0.0;
  MeasureKind kind = MeasureKind::surface;
  double p = 1.0;
  double q = 2.0;
};

/// One instance of the L_p dual Minkowski problem
///   h^{1-p} (h² + h'²)^{(q-2)/2} (h'' + h) = f.
struct ProblemParams {
  double p = 0.5;
  double q = 2.0;
  PeriodicSamples f;
  std::optional<double> lambda;

  /// Checks f > 0 and, when lambda is given, 1/lambda <= f <= lambda
  /// (to a relative slack of 1e-12).
  static ProblemParams make(double p, double q, PeriodicSamples f,
                            std::optional<double> lambda = std::nullopt);
};

/// h^{1-p} with the conventions used throughout: exactly 1 for p = 1; zero
/// where h <= floor when p < 1; singular-density error when p > 1 and
/// min h <= floor.
Eigen::VectorXd lp_weight(const Eigen::VectorXd& h, double p, double floor);

MeasureDensity surface_density(const SupportFunction& body);
MeasureDensity lp_surface_density(const SupportFunction& body, double p);

/// Normalization of C~_q. `equation` matches the density of the
/// Monge–Ampère equation (no 1/n factor); `variational` carries the 1/2
/// that makes dVol~_q(K + tL)/dt = q ∫ h_L / h_K dC~_q hold.
enum class DualNormalization { equation, variational };

MeasureDensity dual_curvature_density(const SupportFunction& body, double q,
                                      DualNormalization norm = DualNormalization::equation);
MeasureDensity lp_dual_density(const SupportFunction& body, double p, double q);

/// q-th dual volume (1/2) ∫ ρ(ξ)^q dξ computed from the radial function, with
/// the direction grid refined until the quadrature settles.
double dual_volume(const SupportFunction& body, double q);

struct VariationalReport {
  std::string formula;
  double fd_slope = 0.0;       // extrapolated one-sided difference quotient
  double formula_value = 0.0;  // right-hand side of the variational formula
  double rel_error = 0.0;
  std::vector<double> steps;
  std::vector<double> raw_slopes;  // difference quotients before extrapolation
  std::vector<double> raw_errors;  // |raw_slope - formula_value|
  std::string normalization;
};

std::vector<double> default_fd_steps();

VariationalReport check_aleksandrov(const SupportFunction& k, const SupportFunction& l,
                                    const std::vector<double>& steps = default_fd_steps());
VariationalReport check_lp_variational(const SupportFunction& k, const SupportFunction& l,
                                       double p,
                                       const std::vector<double>& steps = default_fd_steps());
VariationalReport check_dual_variational(const SupportFunction& k, const SupportFunction& l,
                                         double q,
                                         const std::vector<double>& steps = default_fd_steps());

/// Polynomial (Neville) extrapolation of the samples (s_i, y_i) to s = 0.
double extrapolate_to_zero(const std::vector<double>& s, const std::vector<double>& y);

}  // namespace s1mk
