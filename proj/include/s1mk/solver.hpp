#pragma once

// Damped-Newton continuation solver for
//   F(h) = h^{1-p} (h² + h'²)^{(q-2)/2} (h'' + h) - f = 0   on the circle.

#include <optional>
#include <vector>

#include "s1mk/convex_body.hpp"
#include "s1mk/error.hpp"
#include "s1mk/measures.hpp"

namespace s1mk {

struct SolverConfig {
  double newton_tol = 1e-10;  // sup-norm of the residual
  int max_newton = 50;        // per continuation stage
  int continuation_steps = 10;
  double damping_min = 1e-4;
  double positivity_floor = 1e-8;
  /// Stage bisections allowed when a continuation stage fails.
  int max_refinements = 8;
  /// Jacobians with an estimated 1-norm condition number above this are
  /// rejected.
  double max_condition = 1e14;
  /// Solve on this grid (f is resampled) instead of the grid of f.
  std::optional<Grid> grid;
};

struct TraceEntry {
  double stage_t = 0.0;
  int iteration = 0;
  double residual_sup = 0.0;
  double residual_l2 = 0.0;
  double damping = 0.0;
};

struct SolveReport {
  SupportFunction body;
  double residual_sup = 0.0;
  std::vector<int> iterations;  // Newton iterations per continuation stage
  double min_h = 0.0;
  double min_curvature = 0.0;
  bool converged = false;
  std::vector<TraceEntry> trace;
};

class StagnationError : public Error {
 public:
  StagnationError(const std::string& what, SolveReport report)
      : Error(ErrorCode::stagnation, what), report_(std::move(report)) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

struct LinearizedSpectrum {
  double p = 0.0;
  /// k² - (2 - p) for k = 0..k_max: minus the eigenvalues of
  /// v ↦ v'' + v + (1 - p) v on cos kθ, sin kθ.
  std::vector<double> shifted_eigenvalues;
  bool invertible = false;
};

/// The left-hand operator h^{1-p} (h² + h'²)^{(q-2)/2} (h'' + h) with
/// h^{1-p} := 0 at h <= floor for p < 1.
Eigen::VectorXd lp_dual_operator(const Grid& grid, const Eigen::VectorXd& h, double p, double q,
                                 double floor);

PeriodicSamples residual(const PeriodicSamples& h, const ProblemParams& params,
                         double positivity_floor = 1e-8);
PeriodicSamples residual(const SupportFunction& h, const ProblemParams& params,
                         double positivity_floor = 1e-8);

/// Dense Fréchet derivative of the residual at h on the grid of h.
Eigen::MatrixXd jacobian(const PeriodicSamples& h, const ProblemParams& params,
                         double positivity_floor = 1e-8);

/// Continuation in the data from a round (or supplied) solution to f.
SolveReport solve(const ProblemParams& params, const std::optional<SupportFunction>& initial,
                  const SolverConfig& config = {});

LinearizedSpectrum linearized_spectrum(double p, int k_max);

}  // namespace s1mk
