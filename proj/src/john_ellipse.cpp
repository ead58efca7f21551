#include "s1mk/john_ellipse.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <optional>
#include <cmath>
#include <limits>
#include <string>

#include "s1mk/measures.hpp"

namespace s1mk {

Eigen::Matrix2d Ellipse::shape() const {
  const Vec2 a = unit(angle);
  const Vec2 b(-a.y(), a.x());
  return r1 * a * a.transpose() + r2 * b * b.transpose();
}

Ellipse Ellipse::from_shape(const Eigen::Matrix2d& b, const Vec2& center) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(b);
  Ellipse e;
  e.center = center;
  e.r1 = eig.eigenvalues()[1];
  e.r2 = eig.eigenvalues()[0];
  const Vec2 v = eig.eigenvectors().col(1);
  double angle = std::atan2(v.y(), v.x());
  if (angle < 0.0) angle += kPi;
  if (angle >= kPi) angle -= kPi;
  if (e.r1 - e.r2 <= 1e-12 * e.r1) angle = 0.0;
  e.angle = angle;
  return e;
}

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

// Variables: (B11, B12, B22, c1, c2). With a fixed center the last two are
// frozen by masking their rows and columns.
//
// Objective τ·(-log det B) plus the second-order-cone barrier
// -log(t_i² - |B u_i|²), t_i = h_i - u_i·c, for each half-plane. Both terms
// are self-concordant, so the classical damped Newton step needs no line
// search.
struct Barrier {
  const std::vector<Vec2>& normals;
  const std::vector<double>& h;
  bool free_center;

  static Eigen::Matrix2d shape(const Vec5& x) {
    Eigen::Matrix2d b;
    b << x[0], x[1], x[1], x[2];
    return b;
  }
  static Vec2 center(const Vec5& x) { return {x[3], x[4]}; }

  // Barrier parameter: 2 per cone plus 2 for log det.
  double nu() const { return 2.0 * static_cast<double>(normals.size()) + 2.0; }

  bool feasible(const Vec5& x) const {
    if (!(x[0] > 0.0) || !(x[0] * x[2] - x[1] * x[1] > 0.0)) return false;
    const Eigen::Matrix2d b = shape(x);
    const Vec2 c = center(x);
    for (std::size_t i = 0; i < normals.size(); ++i) {
      const double t = h[i] - normals[i].dot(c);
      if (!(t > 0.0) || !(t - (b * normals[i]).norm() > 0.0)) return false;
    }
    return true;
  }

  // Directional derivative of the barrier objective along d.
  double slope(const Vec5& x, double tau, const Vec5& d) const {
    const double det = x[0] * x[2] - x[1] * x[1];
    double s = -tau * (x[2] * d[0] - 2.0 * x[1] * d[1] + x[0] * d[2]) / det;
    const Eigen::Matrix2d b = shape(x);
    const Eigen::Matrix2d db = shape(d);
    const Vec2 c = center(x);
    const Vec2 dc = center(d);
    for (std::size_t i = 0; i < normals.size(); ++i) {
      const Vec2& u = normals[i];
      const Vec2 w = b * u;
      const double t = h[i] - u.dot(c);
      const double dd = 2.0 * t * (-u.dot(dc)) - 2.0 * w.dot(db * u);
      s -= dd / (t * t - w.squaredNorm());
    }
    return s;
  }

  void derivatives(const Vec5& x, double tau, Vec5& grad, Mat5& hess) const {
    grad.setZero();
    hess.setZero();
    const double det = x[0] * x[2] - x[1] * x[1];
    const Eigen::Vector3d dd(x[2], -2.0 * x[1], x[0]);
    Eigen::Matrix3d d2;
    d2 << 0, 0, 1, 0, -2, 0, 1, 0, 0;
    grad.head<3>() -= tau * dd / det;
    hess.topLeftCorner<3, 3>() -= tau * (d2 / det - dd * dd.transpose() / (det * det));
    const Eigen::Matrix2d b = shape(x);
    const Vec2 c = center(x);
    Eigen::Matrix<double, 2, 5> a = Eigen::Matrix<double, 2, 5>::Zero();
    for (std::size_t i = 0; i < normals.size(); ++i) {
      const Vec2& u = normals[i];
      a(0, 0) = u.x();
      a(0, 1) = u.y();
      a(1, 1) = u.x();
      a(1, 2) = u.y();
      const Vec2 w = b * u;
      const double t = h[i] - u.dot(c);
      const double d = t * t - w.squaredNorm();
      // D = t² - |w|², ∇t = -(0, 0, 0, u), ∇w = A.
      Vec5 gt = Vec5::Zero();
      gt.tail<2>() = -u;
      const Vec5 gd = 2.0 * t * gt - 2.0 * a.transpose() * w;
      const Mat5 hd = 2.0 * gt * gt.transpose() - 2.0 * a.transpose() * a;
      grad -= gd / d;
      hess.noalias() += gd * gd.transpose() / (d * d) - hd / d;
    }
    if (!free_center) {
      grad.tail<2>().setZero();
      hess.bottomRows<2>().setZero();
      hess.rightCols<2>().setZero();
      hess(3, 3) = hess(4, 4) = 1.0;
    }
  }
};

Ellipse to_ellipse(const Vec5& x) { return Ellipse::from_shape(Barrier::shape(x), Barrier::center(x)); }

constexpr int kMaxCentering = 100;

// Path-following barrier method for one fixed set of half-planes.
Vec5 run_barrier(const Barrier& barrier, const Vec2& start_center, const JohnOptions& options,
                 int& iterations) {
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < barrier.normals.size(); ++i) {
    slack = std::min(slack, barrier.h[i] - barrier.normals[i].dot(start_center));
  }
  if (!(slack > 0.0)) {
    throw JohnFailure("ellipse center is not interior to the body",
                      Ellipse{start_center, 0.0, 0.0, 0.0});
  }
  Vec5 x = Vec5::Zero();
  x[0] = x[2] = 0.5 * slack;
  x.tail<2>() = start_center;

  double tau = 1.0;
  Vec5 grad;
  Mat5 hess;
  while (true) {
    // Centering.
    double last = std::numeric_limits<double>::infinity();
    for (int inner = 0; inner < kMaxCentering; ++inner) {
      if (++iterations > options.max_iter) {
        throw JohnFailure("John ellipse program did not converge in " +
                              std::to_string(options.max_iter) + " Newton iterations",
                          to_ellipse(x));
      }
      barrier.derivatives(x, tau, grad, hess);
      const Vec5 step = hess.ldlt().solve(-grad);
      const double decrement = -grad.dot(step);
      if (!std::isfinite(decrement) || decrement < 0.0) {
        throw JohnFailure("John ellipse Newton system is singular", to_ellipse(x));
      }
      if (decrement < 1e-20) break;
      // Roundoff floor: inside the quadratic region the decrement stopped
      // shrinking quadratically.
      if (decrement < 1e-3 && decrement > 0.25 * last) break;
      last = decrement;
      double alpha = 1.0;
      while (!barrier.feasible(x + alpha * step) && alpha > 1e-12) alpha *= 0.5;
      if (alpha <= 1e-12) break;
      // The objective is convex along the step, so any α with a nonpositive
      // directional derivative decreases it. Bisect on the derivative rather
      // than on function values, which lose precision once τ is large.
      if (barrier.slope(x + alpha * step, tau, step) > 0.0) {
        double lo = 0.0, hi = alpha;
        for (int k = 0; k < 12; ++k) {
          const double mid = 0.5 * (lo + hi);
          (barrier.slope(x + mid * step, tau, step) <= 0.0 ? lo : hi) = mid;
        }
        alpha = lo > 0.0 ? lo : 1.0 / (1.0 + std::sqrt(decrement));
      }
      if (alpha * step.norm() <= 1e-15 * x.norm()) break;
      x += alpha * step;
    }
    if (barrier.nu() / tau < options.gap_tol) break;
    tau *= 10.0;
  }
  return x;
}

// v(θ) = |B u(θ)| + u(θ)·c - h(θ): positive where E pokes out of the
// supporting half-plane with normal u(θ).
struct ContactFunction {
  const TrigInterpolant& interp;

  // (v, v', v'') at θ for the ellipse (b, c).
  std::array<double, 3> jet(const Eigen::Matrix2d& b, const Vec2& c, double t) const {
    const Vec2 u = unit(t);
    const Vec2 up(-u.y(), u.x());
    const Vec2 w = b * u;
    const Vec2 w1 = b * up;
    const double r = w.norm();
    const double r1 = w.dot(w1) / r;
    const double r2 = (w1.squaredNorm() - w.dot(w)) / r - r1 * r1 / r;
    const auto hj = interp.jet(t);
    return {r + u.dot(c) - hj[0], r1 + up.dot(c) - hj[1], r2 - u.dot(c) - hj[2]};
  }

  // Local maximum of v near t.
  double argmax(const Eigen::Matrix2d& b, const Vec2& c, double t) const {
    for (int k = 0; k < 30; ++k) {
      const auto j = jet(b, c, t);
      if (!(j[2] < 0.0)) break;
      const double dt = -j[1] / j[2];
      t += std::clamp(dt, -1e-2, 1e-2);
      if (std::abs(dt) < 1e-14) break;
    }
    return t;
  }
};

// Local maxima of v within `near` of zero, located on a refined grid.
std::vector<double> contact_directions(const ContactFunction& cf, const Grid& fine,
                                       const PeriodicSamples& fine_h, const Ellipse& e,
                                       double near) {
  const Eigen::Matrix2d b = e.shape();
  const int n = fine.size();
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 u = unit(fine.theta(i));
    v[i] = (b * u).norm() + u.dot(e.center) - fine_h[i];
  }
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double prev = v[(i + n - 1) % n];
    const double next = v[(i + 1) % n];
    if (v[i] >= prev && v[i] > next && v[i] >= -near) {
      out.push_back(cf.argmax(b, e.center, fine.theta(i)));
    }
  }
  return out;
}

// Continuous maximum of v, for the refinement acceptance test.
double max_violation(const ContactFunction& cf, const Grid& fine, const PeriodicSamples& fine_h,
                     const Ellipse& e) {
  const Eigen::Matrix2d b = e.shape();
  double best = -std::numeric_limits<double>::infinity();
  for (double t : contact_directions(cf, fine, fine_h, e, std::numeric_limits<double>::infinity())) {
    best = std::max(best, cf.jet(b, e.center, t)[0]);
  }
  return best;
}

// KKT refinement for the continuous constraint max_θ v(θ) <= 0, with the
// contacts found by the barrier as the active set. Unknowns are the free
// ellipse parameters and one multiplier per contact; the residual uses the
// envelope gradient ∂v/∂x at the tracked maximizers, and its Jacobian is
// formed by central differences.
std::optional<Vec5> polish(const ContactFunction& cf, const Vec5& x0, std::vector<double> thetas,
                           bool free_center) {
  const int nx = free_center ? 5 : 3;
  const int k = static_cast<int>(thetas.size());
  if (k == 0 || k > nx) return std::nullopt;
  const int dim = nx + k;

  auto constraint_grad = [&](const Vec5& x, double t) {
    const Vec2 u = unit(t);
    const Vec2 w = Barrier::shape(x) * u;
    const Vec2 wh = w / w.norm();
    Vec5 g;
    g << u.x() * wh.x(), u.y() * wh.x() + u.x() * wh.y(), u.y() * wh.y(), u.x(), u.y();
    return g;
  };
  auto unpack = [&](const Eigen::VectorXd& y) {
    Vec5 x = x0;
    x.head(nx) = y.head(nx);
    return x;
  };
  // Tracks the maximizers; they are updated in place on accepted steps only.
  auto residual = [&](const Eigen::VectorXd& y, std::vector<double>& ts) {
    const Vec5 x = unpack(y);
    const Eigen::Matrix2d b = Barrier::shape(x);
    const Vec2 c = Barrier::center(x);
    const double det = x[0] * x[2] - x[1] * x[1];
    Vec5 grad_f = Vec5::Zero();
    grad_f.head<3>() << x[2] / det, -2.0 * x[1] / det, x[0] / det;
    Eigen::VectorXd r(dim);
    Vec5 station = grad_f;
    for (int j = 0; j < k; ++j) {
      ts[j] = cf.argmax(b, c, ts[j]);
      station -= y[nx + j] * constraint_grad(x, ts[j]);
      r[nx + j] = cf.jet(b, c, ts[j])[0];
    }
    r.head(nx) = station.head(nx);
    return r;
  };

  // Multipliers from least squares on the stationarity condition at x0.
  Eigen::VectorXd y(dim);
  y.head(nx) = x0.head(nx);
  {
    const double det = x0[0] * x0[2] - x0[1] * x0[1];
    Vec5 grad_f = Vec5::Zero();
    grad_f.head<3>() << x0[2] / det, -2.0 * x0[1] / det, x0[0] / det;
    Eigen::MatrixXd g(nx, k);
    for (int j = 0; j < k; ++j) g.col(j) = constraint_grad(x0, thetas[j]).head(nx);
    y.tail(k) = g.colPivHouseholderQr().solve(grad_f.head(nx));
  }

  double scale = x0.head(nx).cwiseAbs().maxCoeff();
  Eigen::VectorXd r = residual(y, thetas);
  for (int it = 0; it < 30; ++it) {
    if (r.lpNorm<Eigen::Infinity>() <= 1e-13 * std::max(1.0, scale)) break;
    Eigen::MatrixXd jac(dim, dim);
    for (int c = 0; c < dim; ++c) {
      const double step = 1e-6 * std::max(1.0, std::abs(y[c]));
      Eigen::VectorXd yp = y, ym = y;
      yp[c] += step;
      ym[c] -= step;
      auto tp = thetas, tm = thetas;
      jac.col(c) = (residual(yp, tp) - residual(ym, tm)) / (2.0 * step);
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::VectorXd dy = lu.solve(-r);
    double alpha = 1.0;
    bool improved = false;
    for (int bt = 0; bt < 20; ++bt, alpha *= 0.5) {
      const Eigen::VectorXd yn = y + alpha * dy;
      const Vec5 xn = unpack(yn);
      if (!(xn[0] > 0.0 && xn[0] * xn[2] - xn[1] * xn[1] > 0.0)) continue;
      auto tn = thetas;
      const Eigen::VectorXd rn = residual(yn, tn);
      if (rn.norm() < r.norm()) {
        y = yn;
        r = rn;
        thetas = tn;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!(r.lpNorm<Eigen::Infinity>() <= 1e-10 * std::max(1.0, scale))) return std::nullopt;
  if ((y.tail(k).array() < 0.0).any()) return std::nullopt;
  return unpack(y);
}

constexpr int kRefineFactor = 8;
constexpr int kMaxContacts = 10;

bool same_direction(double a, double b) {
  return std::abs(std::remainder(a - b, 2.0 * kPi)) < 1e-6;
}

// Active-set search over the contact directions. The optimum is unique, so
// the first subset whose KKT point has nonnegative multipliers and satisfies
// the continuous constraint is it. Directions where a candidate pokes out
// are added to the pool for the next round.
std::optional<Vec5> refine_active_set(const ContactFunction& cf, const Grid& fine,
                                      const PeriodicSamples& fine_h, const Vec5& x0,
                                      std::vector<double> pool, bool free_center, double tol) {
  const int nx = free_center ? 5 : 3;
  for (int round = 0; round < 4 && !pool.empty(); ++round) {
    const int k = static_cast<int>(pool.size());
    std::vector<unsigned> masks;
    for (unsigned m = 1; m < (1u << k); ++m) {
      if (std::popcount(m) <= nx) masks.push_back(m);
    }
    std::stable_sort(masks.begin(), masks.end(),
                     [](unsigned a, unsigned b) { return std::popcount(a) > std::popcount(b); });
    std::vector<double> added;
    for (unsigned m : masks) {
      std::vector<double> subset;
      for (int j = 0; j < k; ++j) {
        if (m >> j & 1u) subset.push_back(pool[j]);
      }
      const auto cand = polish(cf, x0, subset, free_center);
      if (!cand) continue;
      const Ellipse e = to_ellipse(*cand);
      if (max_violation(cf, fine, fine_h, e) <= tol) return cand;
      for (double t : contact_directions(cf, fine, fine_h, e, 0.0)) {
        const auto in = [t](double s) { return same_direction(s, t); };
        if (std::none_of(pool.begin(), pool.end(), in) && std::none_of(added.begin(), added.end(), in)) {
          added.push_back(t);
        }
      }
    }
    if (added.empty() || k + static_cast<int>(added.size()) > kMaxContacts) break;
    pool.insert(pool.end(), added.begin(), added.end());
  }
  return std::nullopt;
}

JohnResult solve_program(const SupportFunction& body, const JohnOptions& options,
                         bool free_center, const Vec2& start_center) {
  const Grid& g = body.grid();
  std::vector<Vec2> normals;
  std::vector<double> h;
  normals.reserve(g.size());
  for (int i = 0; i < g.size(); ++i) {
    normals.push_back(unit(g.theta(i)));
    h.push_back(body.h()[i]);
  }
  const Barrier barrier{normals, h, free_center};
  int iterations = 0;
  Vec5 x = run_barrier(barrier, start_center, options, iterations);

  // The sampled half-planes overestimate the body by O(Δθ²) between normals;
  // move to the optimum of the continuous constraint when the contact set
  // is isolated.
  const TrigInterpolant interp(body.samples());
  const ContactFunction cf{interp};
  const Grid fine(kRefineFactor * g.size());
  const PeriodicSamples fine_h = interp.resample(fine);
  const double diam = diameter(body);
  const auto thetas = contact_directions(cf, fine, fine_h, to_ellipse(x), 1e-4 * diam);
  if (const auto refined = refine_active_set(cf, fine, fine_h, x, thetas, free_center, 1e-11 * diam)) {
    x = *refined;
  }

  JohnResult r;
  r.ellipse = to_ellipse(x);
  r.certificate = certify(body, r.ellipse);
  r.iterations = iterations;
  return r;
}

}  // namespace

JohnResult john(const SupportFunction& body, const JohnOptions& options) {
  if (options.fixed_center) return solve_program(body, options, false, *options.fixed_center);
  return solve_program(body, options, true, centroid(body));
}

JohnResult john_centroid(const SupportFunction& body, const JohnOptions& options) {
  return solve_program(body, options, false, centroid(body));
}

ContainmentCertificate certify(const SupportFunction& body, const Ellipse& e) {
  ContainmentCertificate cert;
  cert.diameter = diameter(body);
  // Constraints are checked between the sample normals as well.
  const Grid fine(kRefineFactor * body.grid().size());
  const PeriodicSamples fine_h = TrigInterpolant(body.samples()).resample(fine);
  const Eigen::Matrix2d b = e.shape();
  const Eigen::Matrix2d b_inv = b.inverse();
  cert.max_constraint_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < fine.size(); ++i) {
    const Vec2 u = unit(fine.theta(i));
    cert.max_constraint_violation =
        std::max(cert.max_constraint_violation, (b * u).norm() + u.dot(e.center) - fine_h[i]);
  }
  cert.min_outside_e = std::numeric_limits<double>::infinity();
  cert.max_outside_2e = -std::numeric_limits<double>::infinity();
  for (const auto& pt : boundary(body).points) {
    const Vec2 rel = pt.x - e.center;
    const double dist = rel.norm();
    const double scaled = (b_inv * rel).norm();
    cert.containment_factor = std::max(cert.containment_factor, scaled);
    if (scaled <= 0.0) {
      cert.min_outside_e = std::min(cert.min_outside_e, -e.r2);
      continue;
    }
    cert.min_outside_e = std::min(cert.min_outside_e, dist * (1.0 - 1.0 / scaled));
    cert.max_outside_2e = std::max(cert.max_outside_2e, dist * (1.0 - 2.0 / scaled));
  }
  cert.e_in_k = cert.max_constraint_violation <= 1e-9 * cert.diameter &&
                cert.min_outside_e >= -1e-8 * cert.diameter;
  cert.k_in_2e = cert.max_outside_2e <= 1e-6 * cert.diameter;
  return cert;
}

double sandwich_upper_constant(double p, double q) {
  return std::pow(2.0, 2.0 * q - 1.0 - 1.5 * p) * kPi;
}

SandwichReport sandwich_ratio(const SupportFunction& body, const Ellipse& e, double p, double q,
                              const SandwichConfig& config) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 2.0)) {
    throw Error(ErrorCode::hypothesis_violation,
                "sandwich bound needs p in [0, 1] and q >= 2 (got p = " + std::to_string(p) +
                    ", q = " + std::to_string(q) + ")");
  }
  SandwichReport r;
  r.r1 = e.r1;
  r.r2 = e.r2;
  r.c2 = sandwich_upper_constant(p, q);
  r.total = lp_dual_density(body, p, q).total;
  r.denominator = std::pow(e.r1 * e.r2, 1.0 - p) *
                  std::pow(e.r1 * e.r1 + e.r2 * e.r2, 0.5 * (p + q - 2.0));
  r.ratio = r.total / r.denominator;
  r.upper_ok = r.ratio <= r.c2 * (1.0 + config.upper_rel_tol);
  r.lower_ok = r.ratio >= config.c1_floor;
  return r;
}

SandwichReport sandwich_ratio(const SupportFunction& body, double p, double q,
                              const SandwichConfig& config) {
  // Validate the hypothesis before paying for the ellipse.
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 2.0)) return sandwich_ratio(body, Ellipse{}, p, q, config);
  return sandwich_ratio(body, john(body).ellipse, p, q, config);
}

}  // namespace s1mk
