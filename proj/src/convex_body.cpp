#include "s1mk/convex_body.hpp"

#include <cmath>
#include <string>

#include "s1mk/error.hpp"

namespace s1mk {

double default_tol_convex(const Eigen::VectorXd& h) {
  return 1e-9 * std::max(h.maxCoeff(), 0.0);
}

SupportFunction::SupportFunction(PeriodicSamples h)
    : h_(std::move(h)),
      dh_(diff(h_.grid(), h_.values(), 1)),
      d2h_(diff(h_.grid(), h_.values(), 2)) {}

SupportFunction SupportFunction::trusted(const PeriodicSamples& h) { return SupportFunction(h); }

SupportFunction SupportFunction::from_samples(const PeriodicSamples& h, double tol_convex) {
  const auto& v = h.values();
  Eigen::Index worst = 0;
  const double min_h = v.minCoeff(&worst);
  if (min_h < 0.0) {
    throw Error(ErrorCode::not_in_k0,
                "support function is negative (" + std::to_string(min_h) + " at grid point " +
                    std::to_string(worst) + "): origin is not in the body");
  }
  SupportFunction body(h);
  const double tol = tol_convex < 0.0 ? default_tol_convex(v) : tol_convex;
  const Eigen::VectorXd curv = body.curvature_radius();
  const double min_curv = curv.minCoeff(&worst);
  if (min_curv < -tol) {
    const int i = static_cast<int>(worst);
    throw NonconvexError(i, h.grid().theta(i), min_curv);
  }
  return body;
}

SupportFunction SupportFunction::from_samples(const Eigen::VectorXd& values, const Grid& grid,
                                              double tol_convex) {
  return from_samples(PeriodicSamples(grid, values), tol_convex);
}

SupportFunction disk(const Grid& grid, double radius, const Vec2& center) {
  return SupportFunction::from_samples(PeriodicSamples::from_function(
      grid, [&](double t) { return radius + center.dot(unit(t)); }));
}

SupportFunction ellipse(const Grid& grid, double a, double b, double angle, const Vec2& center) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "ellipse semi-axes must be positive");
  }
  return SupportFunction::from_samples(PeriodicSamples::from_function(grid, [&](double t) {
    const double c = std::cos(t - angle);
    const double s = std::sin(t - angle);
    return std::sqrt(a * a * c * c + b * b * s * s) + center.dot(unit(t));
  }));
}

SupportFunction translated(const SupportFunction& body, const Vec2& offset) {
  const Grid& g = body.grid();
  Eigen::VectorXd v = body.h();
  for (int i = 0; i < g.size(); ++i) v[i] += offset.dot(unit(g.theta(i)));
  return SupportFunction::from_samples(v, g);
}

SupportFunction scaled(const SupportFunction& body, double factor) {
  if (!(factor > 0.0)) throw Error(ErrorCode::invalid_argument, "scale factor must be positive");
  return SupportFunction::trusted(PeriodicSamples(body.grid(), body.h() * factor));
}

SupportFunction rotated(const SupportFunction& body, double phi) {
  return SupportFunction::from_samples(TrigInterpolant(body.samples()).shifted(phi));
}

SupportFunction resampled(const SupportFunction& body, const Grid& grid) {
  return SupportFunction::from_samples(TrigInterpolant(body.samples()).resample(grid));
}

BoundaryTrace boundary(const SupportFunction& body) {
  const Grid& g = body.grid();
  BoundaryTrace trace;
  trace.points.reserve(g.size());
  const Eigen::VectorXd curv = body.curvature_radius();
  trace.min_curvature = curv.minCoeff();
  trace.degenerate = trace.min_curvature <= default_tol_convex(body.h());
  for (int i = 0; i < g.size(); ++i) {
    const double t = g.theta(i);
    const Vec2 u = unit(t);
    const Vec2 u_perp(-u.y(), u.x());
    trace.points.push_back({body.h()[i] * u + body.dh()[i] * u_perp, t});
  }
  return trace;
}

namespace {

void require_interior_origin(const SupportFunction& body) {
  if (body.min_h() <= 1e-12 * std::max(body.max_h(), 1.0)) {
    throw Error(ErrorCode::origin_on_boundary,
                "origin is not strictly inside the body (min h = " +
                    std::to_string(body.min_h()) + ")");
  }
}

// ρ(ξ) is the minimum over normals θ of h(θ)/cos(θ - φ). The minimizer is the
// normal at the radial boundary point, where
//   g(θ) = h(θ) sin(θ - φ) + h'(θ) cos(θ - φ)
// changes sign from negative to positive.
double radial_at(const SupportFunction& body, const TrigInterpolant& interp, double phi) {
  const Grid& g = body.grid();
  const auto& h = body.h();
  int best = -1;
  double best_q = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double c = std::cos(g.theta(i) - phi);
    if (c <= 1e-3) continue;
    const double q = h[i] / c;
    if (best < 0 || q < best_q) {
      best = i;
      best_q = q;
    }
  }
  auto crossing = [&](double t) {
    const auto j = interp.jet(t);
    return j[0] * std::sin(t - phi) + j[1] * std::cos(t - phi);
  };
  const double dt = g.spacing();
  double a = g.theta(best) - dt;
  double b = g.theta(best) + dt;
  // Widen the bracket while keeping cos(θ - φ) comfortably positive.
  for (int k = 0; k < 8 && crossing(a) > 0.0 && std::cos(a - dt - phi) > 0.05; ++k) a -= dt;
  for (int k = 0; k < 8 && crossing(b) < 0.0 && std::cos(b + dt - phi) > 0.05; ++k) b += dt;
  if (crossing(a) > 0.0 || crossing(b) < 0.0) return best_q;
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    if (crossing(m) < 0.0) {
      a = m;
    } else {
      b = m;
    }
  }
  const double t = 0.5 * (a + b);
  return interp(t) / std::cos(t - phi);
}

}  // namespace

PeriodicSamples radial(const SupportFunction& body, const Grid& out_grid) {
  require_interior_origin(body);
  const TrigInterpolant interp(body.samples());
  return PeriodicSamples::from_function(out_grid,
                                        [&](double phi) { return radial_at(body, interp, phi); });
}

PeriodicSamples radial(const SupportFunction& body) { return radial(body, body.grid()); }

std::vector<double> radial(const SupportFunction& body, const std::vector<double>& directions) {
  require_interior_origin(body);
  const TrigInterpolant interp(body.samples());
  std::vector<double> out;
  out.reserve(directions.size());
  for (double phi : directions) out.push_back(radial_at(body, interp, phi));
  return out;
}

PeriodicSamples rho_at_normal(const SupportFunction& body) {
  const auto& h = body.h();
  const auto& dh = body.dh();
  return PeriodicSamples(body.grid(), (h.array().square() + dh.array().square()).sqrt().matrix());
}

double area(const SupportFunction& body) {
  return 0.5 * integrate(body.grid(), body.h().cwiseProduct(body.curvature_radius()));
}

double perimeter(const SupportFunction& body) { return integrate(body.samples()); }

double diameter(const SupportFunction& body) {
  const int n = body.grid().size();
  const auto& h = body.h();
  double best = 0.0;
  for (int i = 0; i < n / 2; ++i) best = std::max(best, h[i] + h[i + n / 2]);
  return best;
}

Vec2 centroid(const SupportFunction& body) {
  const auto pts = boundary(body).points;
  const int n = static_cast<int>(pts.size());
  double twice_area = 0.0;
  Vec2 acc = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec2& a = pts[i].x;
    const Vec2& b = pts[(i + 1) % n].x;
    const double cross = a.x() * b.y() - a.y() * b.x();
    twice_area += cross;
    acc += cross * (a + b);
  }
  if (std::abs(twice_area) < 1e-300) {
    Vec2 mean = Vec2::Zero();
    for (const auto& p : pts) mean += p.x;
    return mean / n;
  }
  return acc / (3.0 * twice_area);
}

namespace {

void require_same_grid(const SupportFunction& k, const SupportFunction& l) {
  if (!(k.grid() == l.grid())) {
    throw Error(ErrorCode::invalid_argument, "bodies live on different grids");
  }
}

}  // namespace

SupportFunction minkowski_sum(const SupportFunction& k, const SupportFunction& l, double t) {
  require_same_grid(k, l);
  if (!(t >= 0.0)) throw Error(ErrorCode::invalid_argument, "Minkowski weight must be >= 0");
  return SupportFunction::trusted(PeriodicSamples(k.grid(), k.h() + t * l.h()));
}

SupportFunction p_sum(const SupportFunction& k, const SupportFunction& l, double t, double p) {
  require_same_grid(k, l);
  if (!(p >= 1.0)) {
    throw Error(ErrorCode::unsupported, "p-sums are only supported for p >= 1");
  }
  if (!(t >= 0.0)) throw Error(ErrorCode::invalid_argument, "p-sum weight must be >= 0");
  if (k.min_h() <= 0.0 || l.min_h() <= 0.0) {
    throw Error(ErrorCode::domain_error, "p-sum requires strictly positive support functions");
  }
  if (p == 1.0) return minkowski_sum(k, l, t);
  const Eigen::ArrayXd hk = k.h().array();
  const Eigen::ArrayXd hl = l.h().array();
  const Eigen::VectorXd v = (hk.pow(p) + t * hl.pow(p)).pow(1.0 / p).matrix();
  return SupportFunction::from_samples(v, k.grid());
}

}  // namespace s1mk
