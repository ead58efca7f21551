#include "s1mk/measures.hpp"

#include <cmath>
#include <functional>

#include "s1mk/error.hpp"

namespace s1mk {

const char* to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::surface: return "surface";
    case MeasureKind::lp_surface: return "lp_surface";
    case MeasureKind::dual_curvature: return "dual_curvature";
    case MeasureKind::lp_dual_curvature: return "lp_dual_curvature";
  }
  return "unknown";
}

ProblemParams ProblemParams::make(double p, double q, PeriodicSamples f,
                                  std::optional<double> lambda) {
  if (!std::isfinite(p) || !std::isfinite(q)) {
    throw Error(ErrorCode::invalid_argument, "p and q must be finite");
  }
  if (!(f.min() > 0.0) || !f.values().allFinite()) {
    throw Error(ErrorCode::invalid_argument, "data f must be positive and finite");
  }
  if (lambda) {
    const double lam = *lambda;
    if (!(lam >= 1.0)) throw Error(ErrorCode::invalid_argument, "lambda must be >= 1");
    const double slack = 1e-12 * lam;
    if (f.min() < 1.0 / lam - slack || f.max() > lam + slack) {
      throw Error(ErrorCode::invalid_argument, "data f violates 1/lambda <= f <= lambda");
    }
  }
  return ProblemParams{p, q, std::move(f), lambda};
}

Eigen::VectorXd lp_weight(const Eigen::VectorXd& h, double p, double floor) {
  if (p == 1.0) return Eigen::VectorXd::Ones(h.size());
  if (p > 1.0 && h.minCoeff() <= floor) {
    throw Error(ErrorCode::singular_density,
                "h^(1-p) is singular: min h = " + std::to_string(h.minCoeff()) +
                    " with p = " + std::to_string(p));
  }
  Eigen::VectorXd w(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    w[i] = h[i] <= floor ? 0.0 : std::pow(h[i], 1.0 - p);
  }
  return w;
}

namespace {

double weight_floor(const SupportFunction& body) { return 1e-12 * std::max(body.max_h(), 1.0); }

MeasureDensity make_density(const Grid& grid, Eigen::VectorXd density, MeasureKind kind,
                            double p, double q) {
  PeriodicSamples s(grid, std::move(density));
  const double total = integrate(s);
  return MeasureDensity{std::move(s), total, kind, p, q};
}

// ρ^{q-2} = (h² + h'²)^{(q-2)/2}, exactly 1 for q = 2.
Eigen::VectorXd rho_power(const SupportFunction& body, double q) {
  const Eigen::VectorXd rho = rho_at_normal(body).values();
  if (q == 2.0) return Eigen::VectorXd::Ones(rho.size());
  if (q < 2.0 && rho.minCoeff() <= weight_floor(body)) {
    throw Error(ErrorCode::singular_density,
                "rho^(q-2) is singular: the boundary passes through the origin");
  }
  return rho.array().pow(q - 2.0).matrix();
}

}  // namespace

MeasureDensity surface_density(const SupportFunction& body) {
  return make_density(body.grid(), body.curvature_radius(), MeasureKind::surface, 1.0, 2.0);
}

MeasureDensity lp_surface_density(const SupportFunction& body, double p) {
  const Eigen::VectorXd w = lp_weight(body.h(), p, weight_floor(body));
  return make_density(body.grid(), w.cwiseProduct(body.curvature_radius()),
                      MeasureKind::lp_surface, p, 2.0);
}

MeasureDensity dual_curvature_density(const SupportFunction& body, double q,
                                      DualNormalization norm) {
  if (q == 0.0) throw Error(ErrorCode::invalid_argument, "dual curvature measure needs q != 0");
  Eigen::VectorXd d =
      body.h().cwiseProduct(rho_power(body, q)).cwiseProduct(body.curvature_radius());
  if (norm == DualNormalization::variational) d *= 0.5;
  return make_density(body.grid(), std::move(d), MeasureKind::dual_curvature, 0.0, q);
}

MeasureDensity lp_dual_density(const SupportFunction& body, double p, double q) {
  const Eigen::VectorXd w = lp_weight(body.h(), p, weight_floor(body));
  Eigen::VectorXd d = w.cwiseProduct(body.curvature_radius());
  if (q != 2.0) d = d.cwiseProduct(rho_power(body, q));
  return make_density(body.grid(), std::move(d), MeasureKind::lp_dual_curvature, p, q);
}

double dual_volume(const SupportFunction& body, double q) {
  if (q == 0.0) throw Error(ErrorCode::invalid_argument, "dual volume needs q != 0");
  // Rectangle rule in the direction angle, doubling the number of directions
  // until two successive estimates agree. Only the new midpoints are
  // evaluated at each level. ρ is analytic but can vary quickly near
  // high-curvature arcs, so the body's own grid is not always enough.
  const int n = body.grid().size();
  const int max_points = 16 * n;
  auto power_sum = [&](const std::vector<double>& dirs) {
    double s = 0.0;
    for (double r : radial(body, dirs)) s += std::pow(r, q);
    return s;
  };
  std::vector<double> dirs(n);
  for (int i = 0; i < n; ++i) dirs[i] = kTwoPi * i / n;
  double sum = power_sum(dirs);
  int m = n;
  double estimate = 0.5 * sum * kTwoPi / m;
  while (2 * m <= max_points) {
    dirs.resize(m);
    for (int i = 0; i < m; ++i) dirs[i] = kTwoPi * (i + 0.5) / m;
    sum += power_sum(dirs);
    m *= 2;
    const double next = 0.5 * sum * kTwoPi / m;
    const bool done = std::abs(next - estimate) <= 1e-14 * std::abs(next);
    estimate = next;
    if (done) break;
  }
  return estimate;
}

std::vector<double> default_fd_steps() { return {1e-2, 5e-3, 2.5e-3}; }

double extrapolate_to_zero(const std::vector<double>& s, const std::vector<double>& y) {
  if (s.empty() || s.size() != y.size()) {
    throw Error(ErrorCode::invalid_argument, "extrapolation needs matching, non-empty samples");
  }
  std::vector<double> t = y;
  const std::size_t n = s.size();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) {
      // Neville recurrence evaluated at 0.
      t[i] = (s[i] * t[i + 1] - s[i + level] * t[i]) / (s[i] - s[i + level]);
    }
  }
  return t[0];
}

namespace {

VariationalReport run_check(std::string formula, const std::vector<double>& steps,
                            const std::function<double(double)>& functional, double rhs) {
  if (steps.empty()) throw Error(ErrorCode::invalid_argument, "need at least one step");
  VariationalReport r;
  r.formula = std::move(formula);
  r.steps = steps;
  r.formula_value = rhs;
  const double base = functional(0.0);
  for (double s : steps) {
    if (!(s > 0.0)) throw Error(ErrorCode::invalid_argument, "steps must be positive");
    const double slope = (functional(s) - base) / s;
    r.raw_slopes.push_back(slope);
    r.raw_errors.push_back(std::abs(slope - rhs));
  }
  r.fd_slope = extrapolate_to_zero(steps, r.raw_slopes);
  r.rel_error = std::abs(r.fd_slope - rhs) / std::max(std::abs(rhs), 1e-300);
  return r;
}

}  // namespace

VariationalReport check_aleksandrov(const SupportFunction& k, const SupportFunction& l,
                                    const std::vector<double>& steps) {
  const double rhs = integrate(k.grid(), l.h().cwiseProduct(k.curvature_radius()));
  return run_check(
      "aleksandrov", steps, [&](double t) { return area(minkowski_sum(k, l, t)); }, rhs);
}

VariationalReport check_lp_variational(const SupportFunction& k, const SupportFunction& l,
                                       double p, const std::vector<double>& steps) {
  if (!(p >= 1.0)) throw Error(ErrorCode::unsupported, "L_p variation needs p >= 1");
  if (k.min_h() <= 0.0 || l.min_h() <= 0.0) {
    throw Error(ErrorCode::domain_error, "L_p variation needs positive support functions");
  }
  const Eigen::VectorXd lp = l.h().array().pow(p).matrix();
  const Eigen::VectorXd sp = lp_surface_density(k, p).density.values();
  const double rhs = integrate(k.grid(), lp.cwiseProduct(sp)) / p;
  return run_check(
      "lp", steps, [&](double t) { return area(p_sum(k, l, t, p)); }, rhs);
}

VariationalReport check_dual_variational(const SupportFunction& k, const SupportFunction& l,
                                         double q, const std::vector<double>& steps) {
  if (q == 0.0) throw Error(ErrorCode::invalid_argument, "dual variation needs q != 0");
  if (k.min_h() <= 0.0) {
    throw Error(ErrorCode::origin_on_boundary, "dual variation needs the origin inside K");
  }
  const Eigen::VectorXd dcq =
      dual_curvature_density(k, q, DualNormalization::variational).density.values();
  const Eigen::VectorXd ratio = l.h().cwiseQuotient(k.h());
  const double rhs = q * integrate(k.grid(), ratio.cwiseProduct(dcq));
  auto r = run_check(
      "dual", steps, [&](double t) { return dual_volume(minkowski_sum(k, l, t), q); }, rhs);
  r.normalization = "variational: dC~_q = (1/2) h (h^2 + h'^2)^((q-2)/2) (h'' + h) dtheta";
  return r;
}

}  // namespace s1mk
