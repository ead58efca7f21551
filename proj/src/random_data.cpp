#include "s1mk/random_data.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "s1mk/error.hpp"

namespace s1mk {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id) {
  std::uint64_t x = master;
  const std::uint64_t a = splitmix64(x);
  std::uint64_t y = a ^ (id * 0xD1B54A32D192ED03ULL);
  return splitmix64(y);
}

// xoshiro256** seeded through splitmix64.
Rng::Rng(std::uint64_t seed) {
  for (auto& s : state_) s = splitmix64(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

const char* to_string(FKind kind) {
  switch (kind) {
    case FKind::trig: return "trig";
    case FKind::bump: return "bump";
    case FKind::piecewise_smoothed: return "piecewise-smoothed";
  }
  return "unknown";
}

FKind f_kind_from_string(const std::string& name) {
  if (name == "trig") return FKind::trig;
  if (name == "bump") return FKind::bump;
  if (name == "piecewise-smoothed" || name == "piecewise") return FKind::piecewise_smoothed;
  throw Error(ErrorCode::invalid_argument, "unknown data kind '" + name + "'");
}

namespace {

Eigen::VectorXd trig_shape(Rng& rng, const Grid& grid, int degree) {
  std::vector<double> a(degree + 1), b(degree + 1);
  for (int k = 1; k <= degree; ++k) {
    a[k] = rng.uniform(-1.0, 1.0) / k;
    b[k] = rng.uniform(-1.0, 1.0) / k;
  }
  Eigen::VectorXd g(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const double t = grid.theta(i);
    double v = 0.0;
    for (int k = 1; k <= degree; ++k) v += a[k] * std::cos(k * t) + b[k] * std::sin(k * t);
    g[i] = v;
  }
  return g;
}

Eigen::VectorXd bump_shape(Rng& rng, const Grid& grid) {
  const double center = rng.uniform(0.0, kTwoPi);
  const double kappa = rng.uniform(4.0, 12.0);
  Eigen::VectorXd g(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    g[i] = std::exp(kappa * (std::cos(grid.theta(i) - center) - 1.0));
  }
  return g;
}

Eigen::VectorXd piecewise_shape(Rng& rng, const Grid& grid) {
  const int arcs = 3 + static_cast<int>(rng.uniform() * 4.0);
  std::vector<double> breaks(arcs);
  for (auto& b : breaks) b = rng.uniform(0.0, kTwoPi);
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> levels(arcs);
  for (auto& l : levels) l = rng.uniform();
  const int n = grid.size();
  std::vector<double> raw(n);
  for (int i = 0; i < n; ++i) {
    const double t = grid.theta(i);
    int arc = arcs - 1;  // wraps around before the first break
    for (int j = 0; j < arcs; ++j) {
      if (t >= breaks[j]) arc = j;
    }
    raw[i] = levels[arc];
  }
  // Gaussian smoothing in Fourier space.
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, raw);
  for (int j = 0; j < n; ++j) {
    const double k = j <= n / 2 ? j : j - n;
    spec[j] *= std::exp(-0.01 * k * k);
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<Eigen::VectorXd>(out.data(), n);
}

}  // namespace

PeriodicSamples gen_f(FKind kind, double lambda, std::uint64_t seed, const Grid& grid) {
  if (!(lambda >= 1.0)) throw Error(ErrorCode::invalid_argument, "lambda must be >= 1");
  if (lambda == 1.0) return PeriodicSamples::constant(grid, 1.0);
  Rng rng(seed);
  Eigen::VectorXd g;
  switch (kind) {
    case FKind::trig: g = trig_shape(rng, grid, 4); break;
    case FKind::bump: g = bump_shape(rng, grid); break;
    case FKind::piecewise_smoothed: g = piecewise_shape(rng, grid); break;
  }
  const double lo = 1.0 / lambda;
  const double hi = lambda;
  const double gmin = g.minCoeff();
  const double gmax = g.maxCoeff();
  if (gmax - gmin < 1e-12) return PeriodicSamples::constant(grid, 1.0);
  Eigen::VectorXd f = (lo + (g.array() - gmin) / (gmax - gmin) * (hi - lo)).matrix();
  // Guard the end points against rounding.
  f = f.cwiseMax(lo).cwiseMin(hi);
  return PeriodicSamples(grid, std::move(f));
}

double c_alpha_proxy(const PeriodicSamples& g, double alpha) {
  return g.values().lpNorm<Eigen::Infinity>() + holder_seminorm(g, alpha);
}

PeriodicSamples unit_perturbation(std::uint64_t seed, const Grid& grid, double alpha) {
  Rng rng(seed);
  Eigen::VectorXd g = trig_shape(rng, grid, 3);
  const double proxy = c_alpha_proxy(PeriodicSamples(grid, g), alpha);
  if (proxy > 0.0) g /= proxy;
  return PeriodicSamples(grid, std::move(g));
}

SupportFunction random_body(const Grid& grid, std::uint64_t seed,
                            const RandomBodyOptions& options) {
  Rng rng(seed);
  const int n = grid.size();
  for (int attempt = 0; attempt < 32; ++attempt) {
    // Shape part: degrees 2..max_degree change curvature; degree 1 translates.
    Eigen::VectorXd shape = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd shape_curv = Eigen::VectorXd::Zero(n);
    for (int k = 2; k <= options.max_degree; ++k) {
      const double a = rng.uniform(-1.0, 1.0) / (k * k);
      const double b = rng.uniform(-1.0, 1.0) / (k * k);
      for (int i = 0; i < n; ++i) {
        const double t = grid.theta(i);
        const double v = a * std::cos(k * t) + b * std::sin(k * t);
        shape[i] += v;
        shape_curv[i] += (1.0 - k * k) * v;
      }
    }
    const double worst = -shape_curv.minCoeff();
    const double amp = worst > 0.0 ? rng.uniform(0.1, 0.95) / worst : 0.0;
    Eigen::VectorXd h = (1.0 + amp * shape.array()).matrix();
    const double inradius = h.minCoeff();
    if (!(inradius > 0.0)) continue;
    const double offset = rng.uniform(0.0, options.max_offset) * inradius;
    const Vec2 shift = offset * unit(rng.uniform(0.0, kTwoPi));
    for (int i = 0; i < n; ++i) h[i] += shift.dot(unit(grid.theta(i)));
    h *= rng.uniform(options.min_scale, options.max_scale);
    try {
      auto body = SupportFunction::from_samples(h, grid);
      if (body.min_h() > 0.0 && body.min_curvature() > 0.0) return body;
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::numerical_failure, "random body generation failed after retries");
}

std::vector<EllipseSpec> ellipse_battery(int base_grid) {
  std::vector<EllipseSpec> out;
  const double aspects[] = {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0};
  int idx = 0;
  for (double aspect : aspects) {
    int n = base_grid;
    while (n < 64 * aspect) n *= 2;
    for (double offset : {0.0, 0.6}) {
      out.push_back({aspect, std::fmod(0.37 * idx, kPi), offset, n});
      ++idx;
    }
  }
  return out;
}

SupportFunction make_battery_ellipse(const EllipseSpec& spec) {
  const Grid grid(spec.n_points);
  const double a = 1.0;
  const double b = 1.0 / spec.aspect;
  const Vec2 center = -spec.offset_fraction * a * unit(spec.angle);
  return ellipse(grid, a, b, spec.angle, center);
}

}  // namespace s1mk
