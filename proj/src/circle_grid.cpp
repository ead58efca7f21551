#include "s1mk/circle_grid.hpp"

#include <cmath>
#include <mutex>
#include <string>

#include <unsupported/Eigen/FFT>

#include "s1mk/error.hpp"

namespace s1mk {

struct Grid::Cache {
  std::once_flag theta_once;
  Eigen::VectorXd thetas;
  std::once_flag d1_once;
  Eigen::MatrixXd d1;
  std::once_flag d2_once;
  Eigen::MatrixXd d2;
};

Grid::Grid(int n_points, DiffScheme scheme)
    : n_(n_points), scheme_(scheme), cache_(std::make_shared<Cache>()) {
  if (n_points < 16 || n_points % 2 != 0) {
    throw Error(ErrorCode::invalid_argument,
                "grid size must be even and >= 16, got " + std::to_string(n_points));
  }
}

const Eigen::VectorXd& Grid::thetas() const {
  std::call_once(cache_->theta_once, [this] {
    cache_->thetas.resize(n_);
    for (int i = 0; i < n_; ++i) cache_->thetas[i] = theta(i);
  });
  return cache_->thetas;
}

namespace {

Eigen::MatrixXd build_matrix(const Grid& grid, int order) {
  const int n = grid.size();
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    m.col(j) = diff(grid, e, order);
    e[j] = 0.0;
  }
  return m;
}

Eigen::VectorXd spectral_diff(const Eigen::VectorXd& values, int order) {
  const int n = static_cast<int>(values.size());
  Eigen::FFT<double> fft;
  std::vector<double> in(values.data(), values.data() + n);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  const int half = n / 2;
  for (int j = 0; j < n; ++j) {
    const double k = j <= half ? j : j - n;
    if (order == 1) {
      spec[j] *= (j == half) ? std::complex<double>(0.0) : std::complex<double>(0.0, k);
    } else {
      spec[j] *= -k * k;
    }
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<Eigen::VectorXd>(out.data(), n);
}

Eigen::VectorXd central_diff(const Eigen::VectorXd& values, double dx, int order) {
  const int n = static_cast<int>(values.size());
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    const double prev = values[(i + n - 1) % n];
    const double next = values[(i + 1) % n];
    out[i] = order == 1 ? (next - prev) / (2.0 * dx)
                        : (next - 2.0 * values[i] + prev) / (dx * dx);
  }
  return out;
}

}  // namespace

const Eigen::MatrixXd& Grid::diff_matrix(int order) const {
  if (order == 1) {
    std::call_once(cache_->d1_once, [this] { cache_->d1 = build_matrix(*this, 1); });
    return cache_->d1;
  }
  if (order == 2) {
    std::call_once(cache_->d2_once, [this] { cache_->d2 = build_matrix(*this, 2); });
    return cache_->d2;
  }
  throw Error(ErrorCode::invalid_argument,
              "differentiation order must be 1 or 2, got " + std::to_string(order));
}

PeriodicSamples::PeriodicSamples(Grid grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorCode::invalid_argument,
                "sample count " + std::to_string(values_.size()) +
                    " does not match grid size " + std::to_string(grid_.size()));
  }
}

Eigen::VectorXd diff(const Grid& grid, const Eigen::VectorXd& values, int order) {
  if (order != 1 && order != 2) {
    throw Error(ErrorCode::invalid_argument,
                "differentiation order must be 1 or 2, got " + std::to_string(order));
  }
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::invalid_argument, "sample count does not match grid");
  }
  if (grid.scheme() == DiffScheme::central) return central_diff(values, grid.spacing(), order);
  return spectral_diff(values, order);
}

PeriodicSamples diff(const PeriodicSamples& samples, int order) {
  return PeriodicSamples(samples.grid(), diff(samples.grid(), samples.values(), order));
}

double integrate(const Grid& grid, const Eigen::VectorXd& values) {
  return values.sum() * grid.spacing();
}

double integrate(const PeriodicSamples& samples) {
  return integrate(samples.grid(), samples.values());
}

double holder_seminorm(const PeriodicSamples& samples, double alpha) {
  const int n = samples.size();
  const auto& v = samples.values();
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int steps = std::min(j - i, n - (j - i));
      const double dist = steps * samples.grid().spacing();
      best = std::max(best, std::abs(v[i] - v[j]) / std::pow(dist, alpha));
    }
  }
  return best;
}

TrigInterpolant::TrigInterpolant(const PeriodicSamples& samples) : grid_(samples.grid()) {
  const int n = samples.size();
  Eigen::FFT<double> fft;
  std::vector<double> in(samples.values().data(), samples.values().data() + n);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  coeffs_.resize(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) coeffs_[k] = spec[k] / static_cast<double>(n);
}

double TrigInterpolant::derivative(double theta, int order) const {
  if (order < 0 || order > 2) {
    throw Error(ErrorCode::invalid_argument, "interpolant derivative order must be 0, 1 or 2");
  }
  return jet(theta)[order];
}

std::array<double, 3> TrigInterpolant::jet(double theta) const {
  const int half = static_cast<int>(coeffs_.size()) - 1;
  const std::complex<double> step = std::polar(1.0, theta);
  std::complex<double> phase = step;
  double v0 = coeffs_[0].real();
  double v1 = 0.0;
  double v2 = 0.0;
  for (int k = 1; k < half; ++k) {
    const std::complex<double> term = coeffs_[k] * phase;
    v0 += 2.0 * term.real();
    v1 -= 2.0 * k * term.imag();
    v2 -= 2.0 * static_cast<double>(k) * k * term.real();
    phase *= step;
  }
  const double nyq = coeffs_[half].real();
  const double arg = half * theta;
  v0 += nyq * std::cos(arg);
  v1 -= half * nyq * std::sin(arg);
  v2 -= static_cast<double>(half) * half * nyq * std::cos(arg);
  return {v0, v1, v2};
}

PeriodicSamples TrigInterpolant::resample(const Grid& grid) const {
  return PeriodicSamples::from_function(grid, [this](double t) { return (*this)(t); });
}

PeriodicSamples TrigInterpolant::shifted(double shift) const {
  return PeriodicSamples::from_function(grid_, [&](double t) { return (*this)(t - shift); });
}

}  // namespace s1mk
