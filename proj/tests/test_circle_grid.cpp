#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "s1mk/circle_grid.hpp"
#include "s1mk/error.hpp"
#include "s1mk/random_data.hpp"

using namespace s1mk;

namespace {

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_CASE("grid construction") {
  const Grid g(64);
  CHECK(g.size() == 64);
  CHECK(g.theta(0) == 0.0);
  CHECK(g.spacing() == doctest::Approx(kTwoPi / 64).epsilon(1e-15));
  for (int i = 1; i < g.size(); ++i) CHECK(g.thetas()[i] > g.thetas()[i - 1]);

  CHECK_THROWS_AS(Grid(15), Error);
  CHECK_THROWS_AS(Grid(8), Error);
  CHECK_THROWS_AS(Grid(33), Error);
  CHECK_THROWS_AS(PeriodicSamples(g, Eigen::VectorXd::Zero(10)), Error);
}

TEST_CASE("spectral derivatives of trigonometric polynomials") {
  const Grid g(64);
  const auto c = PeriodicSamples::from_function(g, [](double t) { return std::cos(t); });
  const auto sin_neg = PeriodicSamples::from_function(g, [](double t) { return -std::sin(t); });
  CHECK(max_abs_diff(diff(c, 1).values(), sin_neg.values()) <= 1e-12);

  const auto one = PeriodicSamples::constant(g, 1.0);
  CHECK(diff(one, 2).values().lpNorm<Eigen::Infinity>() <= 1e-12);

  const auto c3 = PeriodicSamples::from_function(g, [](double t) { return std::cos(3 * t); });
  const auto expect = PeriodicSamples::from_function(g, [](double t) { return -9 * std::cos(3 * t); });
  CHECK(max_abs_diff(diff(c3, 2).values(), expect.values()) <= 1e-10);

  CHECK_THROWS_AS(diff(c, 3), Error);
  CHECK_THROWS_AS(diff(c, 0), Error);
}

TEST_CASE("derivative exact for every degree below n/2") {
  const Grid g(32);
  for (int k = 0; k < 16; ++k) {
    const auto s = PeriodicSamples::from_function(
        g, [k](double t) { return std::cos(k * t) + 0.5 * std::sin(k * t); });
    const auto d1 = PeriodicSamples::from_function(
        g, [k](double t) { return -k * std::sin(k * t) + 0.5 * k * std::cos(k * t); });
    const auto d2 = PeriodicSamples::from_function(
        g, [k](double t) { return -k * k * (std::cos(k * t) + 0.5 * std::sin(k * t)); });
    const double scale = std::max(1.0, double(k * k));
    CHECK(max_abs_diff(diff(s, 1).values(), d1.values()) <= 1e-10 * scale);
    CHECK(max_abs_diff(diff(s, 2).values(), d2.values()) <= 1e-10 * scale);
  }
}

TEST_CASE("dense differentiation matrices agree with the transform") {
  const Grid g(32);
  Rng rng(3);
  Eigen::VectorXd v(32);
  for (int i = 0; i < 32; ++i) v[i] = rng.uniform(-1, 1);
  CHECK(max_abs_diff(g.diff_matrix(1) * v, diff(g, v, 1)) <= 1e-12);
  CHECK(max_abs_diff(g.diff_matrix(2) * v, diff(g, v, 2)) <= 1e-10);
}

TEST_CASE("central-difference fallback is second order") {
  auto err = [](int n) {
    const Grid g(n, DiffScheme::central);
    const auto s = PeriodicSamples::from_function(g, [](double t) { return std::exp(std::sin(t)); });
    const auto exact = PeriodicSamples::from_function(g, [](double t) {
      return std::exp(std::sin(t)) * (std::cos(t) * std::cos(t) - std::sin(t));
    });
    return max_abs_diff(diff(s, 2).values(), exact.values());
  };
  const double ratio = err(64) / err(128);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("periodic quadrature") {
  const Grid g(64);
  CHECK(integrate(PeriodicSamples::constant(g, 1.0)) == doctest::Approx(kTwoPi).epsilon(1e-15));
  CHECK(std::abs(integrate(PeriodicSamples::from_function(g, [](double t) { return std::cos(t); }))) <=
        1e-14);

  auto sq = [](double t) { return std::pow(1 + 0.5 * std::cos(t), 2); };
  const double oracle = testing::simpson(sq, 0.0, kTwoPi);
  CHECK(oracle == doctest::Approx(2.25 * kPi).epsilon(1e-12));
  CHECK(integrate(PeriodicSamples::from_function(g, sq)) == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("properties on random smooth samples") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Grid g(128);
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c = rng.uniform(0.2, 1.5);
    auto fn = [&](double t) { return std::exp(c * std::cos(t - a)) + b * std::sin(2 * t); };
    const auto s = PeriodicSamples::from_function(g, fn);
    // ∫ s' = 0 by periodicity.
    CHECK(std::abs(integrate(diff(s, 1))) <= 1e-12);
    // Spectral convergence: doubling the grid changes the integral negligibly.
    const double coarse = integrate(s);
    const double fine = integrate(PeriodicSamples::from_function(Grid(256), fn));
    CHECK(std::abs(coarse - fine) <= 1e-10 * std::abs(fine));
  }
}

TEST_CASE("trigonometric interpolation reproduces samples and shifts") {
  const Grid g(64);
  auto fn = [](double t) { return 1.0 + 0.3 * std::cos(2 * t) - 0.2 * std::sin(5 * t); };
  const auto s = PeriodicSamples::from_function(g, fn);
  const TrigInterpolant interp(s);
  for (double t : {0.0, 0.123, 1.7, 4.0, 6.2}) {
    CHECK(interp(t) == doctest::Approx(fn(t)).epsilon(1e-13));
    const auto j = interp.jet(t);
    CHECK(j[1] == doctest::Approx(-0.6 * std::sin(2 * t) - std::cos(5 * t)).epsilon(1e-12));
    CHECK(j[2] == doctest::Approx(-1.2 * std::cos(2 * t) + 5.0 * std::sin(5 * t)).epsilon(1e-12));
  }
  const auto shifted = interp.shifted(0.4);
  for (int i = 0; i < g.size(); ++i) {
    CHECK(shifted[i] == doctest::Approx(fn(g.theta(i) - 0.4)).epsilon(1e-13));
  }
  const auto fine = interp.resample(Grid(256));
  CHECK(integrate(fine) == doctest::Approx(integrate(s)).epsilon(1e-14));
}

TEST_CASE("hoelder seminorm of a sine") {
  const Grid g(256);
  const auto s = PeriodicSamples::from_function(g, [](double t) { return std::sin(t); });
  // For alpha = 1 the discrete seminorm is the Lipschitz constant, up to O(h²).
  CHECK(holder_seminorm(s, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(holder_seminorm(PeriodicSamples::constant(g, 2.0), 0.5) == 0.0);
}
