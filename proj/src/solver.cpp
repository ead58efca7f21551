#include "s1mk/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>

namespace s1mk {

namespace {

void check_positive_for_p(const Eigen::VectorXd& h, double p, double floor) {
  if (p >= 1.0 && h.minCoeff() <= floor) {
    throw Error(ErrorCode::singular_density,
                "singular residual: min h = " + std::to_string(h.minCoeff()) +
                    " <= positivity floor with p = " + std::to_string(p));
  }
}

Eigen::VectorXd operator_from(const Eigen::VectorXd& h, const Eigen::VectorXd& dh,
                              const Eigen::VectorXd& d2h, double p, double q, double floor) {
  check_positive_for_p(h, p, floor);
  Eigen::VectorXd out = lp_weight(h, p, floor).cwiseProduct(d2h + h);
  if (q != 2.0) {
    const Eigen::ArrayXd g = h.array().square() + dh.array().square();
    out = (out.array() * g.pow(0.5 * (q - 2.0))).matrix();
  }
  return out;
}

}  // namespace

Eigen::VectorXd lp_dual_operator(const Grid& grid, const Eigen::VectorXd& h, double p, double q,
                                 double floor) {
  return operator_from(h, diff(grid, h, 1), diff(grid, h, 2), p, q, floor);
}

PeriodicSamples residual(const PeriodicSamples& h, const ProblemParams& params,
                         double positivity_floor) {
  if (!(h.grid() == params.f.grid())) {
    throw Error(ErrorCode::invalid_argument, "h and f live on different grids");
  }
  return PeriodicSamples(h.grid(), lp_dual_operator(h.grid(), h.values(), params.p, params.q,
                                                    positivity_floor) -
                                       params.f.values());
}

PeriodicSamples residual(const SupportFunction& h, const ProblemParams& params,
                         double positivity_floor) {
  return residual(h.samples(), params, positivity_floor);
}

Eigen::MatrixXd jacobian(const PeriodicSamples& hs, const ProblemParams& params,
                         double positivity_floor) {
  const Grid& grid = hs.grid();
  const Eigen::ArrayXd h = hs.values().array();
  const double p = params.p;
  const double q = params.q;
  if (p != 1.0 && h.minCoeff() <= positivity_floor) {
    throw Error(ErrorCode::singular_density,
                "jacobian needs strictly positive h when p != 1 (min h = " +
                    std::to_string(h.minCoeff()) + ")");
  }
  const Eigen::ArrayXd dh = diff(grid, hs.values(), 1).array();
  const Eigen::ArrayXd curv = diff(grid, hs.values(), 2).array() + h;
  const Eigen::ArrayXd g = h.square() + dh.square();
  Eigen::ArrayXd w = Eigen::ArrayXd::Ones(h.size());
  if (p != 1.0) w = h.pow(1.0 - p);
  Eigen::ArrayXd gq = Eigen::ArrayXd::Ones(h.size());
  if (q != 2.0) gq = g.pow(0.5 * (q - 2.0));

  // DF v = a v + b (h v + h' v') + c (v'' + v)
  const Eigen::ArrayXd a = (1.0 - p) * h.pow(-p) * gq * curv;
  const Eigen::ArrayXd c = w * gq;
  Eigen::ArrayXd b = Eigen::ArrayXd::Zero(h.size());
  if (q != 2.0) b = w * (q - 2.0) * g.pow(0.5 * (q - 4.0)) * curv;

  Eigen::MatrixXd jac = c.matrix().asDiagonal() * grid.diff_matrix(2);
  if (q != 2.0) jac += (b * dh).matrix().asDiagonal() * grid.diff_matrix(1);
  jac.diagonal() += (a + b * h + c).matrix();
  return jac;
}

LinearizedSpectrum linearized_spectrum(double p, int k_max) {
  if (k_max < 2) throw Error(ErrorCode::invalid_argument, "k_max must be >= 2");
  LinearizedSpectrum s;
  s.p = p;
  s.invertible = true;
  for (int k = 0; k <= k_max; ++k) {
    const double v = static_cast<double>(k) * k - (2.0 - p);
    s.shifted_eigenvalues.push_back(v);
    if (std::abs(v) <= 1e-12) s.invertible = false;
  }
  return s;
}

namespace {

enum class StageOutcome { converged, stagnated, exhausted };

class ContinuationSolver {
 public:
  ContinuationSolver(const Grid& grid, double p, double q, const SolverConfig& config)
      : grid_(grid), p_(p), q_(q), config_(config) {}

  Eigen::VectorXd apply(const Eigen::VectorXd& h) const {
    return lp_dual_operator(grid_, h, p_, q_, config_.positivity_floor);
  }

  bool admissible(const Eigen::VectorXd& h) const {
    if (!h.allFinite() || h.minCoeff() <= config_.positivity_floor) return false;
    const Eigen::VectorXd curv = diff(grid_, h, 2) + h;
    return curv.minCoeff() >= -default_tol_convex(h);
  }

  // Damped Newton for operator(h) = target starting at h.
  StageOutcome run_stage(double t, const Eigen::VectorXd& target, Eigen::VectorXd& h,
                         int& iterations, std::vector<TraceEntry>& trace) {
    Eigen::VectorXd r = apply(h) - target;
    iterations = 0;
    trace.push_back({t, 0, r.lpNorm<Eigen::Infinity>(), r.norm(), 0.0});
    const ProblemParams dummy{p_, q_, PeriodicSamples(grid_, target), std::nullopt};
    while (r.lpNorm<Eigen::Infinity>() > config_.newton_tol) {
      if (iterations >= config_.max_newton) return StageOutcome::exhausted;
      ++iterations;
      const Eigen::MatrixXd jac = jacobian(PeriodicSamples(grid_, h), dummy,
                                           config_.positivity_floor);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
      const double rcond = lu.rcond();
      if (!(rcond * config_.max_condition >= 1.0)) {
        throw Error(ErrorCode::singular_linearization,
                    "Jacobian is numerically singular (condition estimate " +
                        std::to_string(1.0 / rcond) + ") at stage t = " + std::to_string(t));
      }
      const Eigen::VectorXd step = lu.solve(-r);
      const double norm0 = r.norm();
      double damping = 1.0;
      bool accepted = false;
      while (damping >= config_.damping_min) {
        Eigen::VectorXd cand = h + damping * step;
        if (admissible(cand)) {
          Eigen::VectorXd rc = apply(cand) - target;
          if (rc.allFinite() && rc.norm() < (1.0 - 1e-4 * damping) * norm0) {
            h = std::move(cand);
            r = std::move(rc);
            accepted = true;
            break;
          }
          // Roundoff floor: the full step cannot reduce an already tiny residual.
          if (rc.allFinite() && damping == 1.0 &&
              rc.lpNorm<Eigen::Infinity>() <= config_.newton_tol) {
            h = std::move(cand);
            r = std::move(rc);
            accepted = true;
            break;
          }
        }
        damping *= 0.5;
      }
      if (!accepted) {
        trace.push_back({t, iterations, r.lpNorm<Eigen::Infinity>(), r.norm(), damping});
        return StageOutcome::stagnated;
      }
      trace.push_back({t, iterations, r.lpNorm<Eigen::Infinity>(), r.norm(), damping});
    }
    return StageOutcome::converged;
  }

 private:
  Grid grid_;
  double p_;
  double q_;
  SolverConfig config_;
};

SolveReport make_report(const Grid& grid, const Eigen::VectorXd& h, const Eigen::VectorXd& f,
                        double p, double q, const SolverConfig& config, bool stage_converged,
                        std::vector<int> iterations, std::vector<TraceEntry> trace) {
  const PeriodicSamples hs(grid, h);
  const SupportFunction body = SupportFunction::trusted(hs);
  double res_sup = std::numeric_limits<double>::infinity();
  try {
    res_sup = (lp_dual_operator(grid, h, p, q, config.positivity_floor) - f)
                  .lpNorm<Eigen::Infinity>();
  } catch (const Error&) {
  }
  SolveReport rep{body, res_sup, std::move(iterations), body.min_h(), body.min_curvature(), false,
                  std::move(trace)};
  rep.converged = stage_converged && res_sup <= config.newton_tol && rep.min_h >= 0.0 &&
                  rep.min_curvature >= -default_tol_convex(h);
  return rep;
}

}  // namespace

SolveReport solve(const ProblemParams& params, const std::optional<SupportFunction>& initial,
                  const SolverConfig& config) {
  const double p = params.p;
  const double q = params.q;
  if (q == p) {
    throw Error(ErrorCode::unsupported, "solve requires q != p");
  }
  if (!(params.f.min() > 0.0)) throw Error(ErrorCode::invalid_argument, "f must be positive");
  if (config.continuation_steps < 1 || config.max_newton < 1 || !(config.newton_tol > 0.0) ||
      !(config.damping_min > 0.0) || !(config.positivity_floor > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "invalid solver configuration");
  }

  const Grid grid = config.grid ? *config.grid : params.f.grid();
  const Eigen::VectorXd f = grid == params.f.grid()
                                ? params.f.values()
                                : TrigInterpolant(params.f).resample(grid).values();

  ContinuationSolver solver(grid, p, q, config);

  // Start: a body that solves the problem exactly for the data f0.
  Eigen::VectorXd h;
  Eigen::VectorXd f0;
  if (initial) {
    const SupportFunction body =
        initial->grid() == grid ? *initial : resampled(*initial, grid);
    h = body.h();
    if (!solver.admissible(h)) {
      throw Error(ErrorCode::invalid_argument,
                  "initial body must be strictly positive and convex");
    }
    f0 = solver.apply(h);
    if (!(f0.minCoeff() > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "initial body must have positive curvature");
    }
  } else {
    const double mean_f = f.mean();
    f0 = Eigen::VectorXd::Constant(grid.size(), mean_f);
    h = Eigen::VectorXd::Constant(grid.size(), std::pow(mean_f, 1.0 / (q - p)));
  }

  std::vector<int> iterations;
  std::vector<TraceEntry> trace;
  double t_done = 0.0;
  double dt = 1.0 / config.continuation_steps;
  int refinements = 0;
  auto target_at = [&](double t) -> Eigen::VectorXd { return (1.0 - t) * f0 + t * f; };

  // Stage t = 0 is exact up to roundoff; polish it anyway so the trace
  // starts from a verified solution.
  {
    int its = 0;
    const auto outcome = solver.run_stage(0.0, f0, h, its, trace);
    iterations.push_back(its);
    if (outcome != StageOutcome::converged) {
      auto rep = make_report(grid, h, f, p, q, config, false, iterations, trace);
      if (outcome == StageOutcome::stagnated) {
        throw StagnationError("damping underflow at the initial stage", std::move(rep));
      }
      return rep;
    }
  }

  while (t_done < 1.0) {
    const double t = t_done + dt >= 1.0 - 1e-12 ? 1.0 : t_done + dt;
    Eigen::VectorXd trial = h;
    int its = 0;
    const auto outcome = solver.run_stage(t, target_at(t), trial, its, trace);
    iterations.push_back(its);
    if (outcome == StageOutcome::converged) {
      h = std::move(trial);
      t_done = t;
      dt = std::min(2.0 * dt, 1.0 / config.continuation_steps);
      continue;
    }
    if (refinements < config.max_refinements) {
      ++refinements;
      dt *= 0.5;
      continue;
    }
    auto rep = make_report(grid, h, f, p, q, config, false, iterations, trace);
    if (outcome == StageOutcome::stagnated) {
      throw StagnationError("damping underflow at continuation stage t = " + std::to_string(t),
                            std::move(rep));
    }
    return rep;
  }

  return make_report(grid, h, f, p, q, config, true, iterations, trace);
}

}  // namespace s1mk
