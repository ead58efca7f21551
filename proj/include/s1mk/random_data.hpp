#pragma once

// Seeded generators for experiment data: positive periodic data f with
// 1/Λ <= f <= Λ, random admissible convex bodies, and eccentric ellipses.
// Every generator is a pure function of its seed.

#include <cstdint>
#include <string>
#include <vector>

#include "s1mk/convex_body.hpp"

namespace s1mk {

/// Deterministic child seed for stream `id` of a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id);

/// xoshiro256** with portable uniform and normal draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::uint64_t state_[4];
  std::uint64_t next();
};

enum class FKind { trig, bump, piecewise_smoothed };

const char* to_string(FKind kind);
FKind f_kind_from_string(const std::string& name);

/// Random positive data rescaled affinely onto [1/lambda, lambda].
/// lambda = 1 gives f ≡ 1.
PeriodicSamples gen_f(FKind kind, double lambda, std::uint64_t seed, const Grid& grid);

/// Zero-mean low-degree trigonometric shape with unit ‖·‖∞ + [·]_{1/2}.
PeriodicSamples unit_perturbation(std::uint64_t seed, const Grid& grid, double alpha = 0.5);

/// ‖g‖∞ + [g]_α, the closeness proxy used for ‖f - 1‖_{C^α}.
double c_alpha_proxy(const PeriodicSamples& g, double alpha = 0.5);

struct RandomBodyOptions {
  double min_scale = 0.5;
  double max_scale = 3.0;
  /// Translation as a fraction of the inradius about the origin.
  double max_offset = 0.9;
  int max_degree = 4;
};

/// h = c + Σ_{k<=4} a_k cos kθ + b_k sin kθ, rescaled so that min h > 0 and
/// min(h'' + h) > 0. Resampled internally until validation passes.
SupportFunction random_body(const Grid& grid, std::uint64_t seed,
                            const RandomBodyOptions& options = {});

struct EllipseSpec {
  double aspect;
  double angle;
  double offset_fraction;  // center shift toward the r1 tip, as a fraction of r1
  int n_points;
};

/// Eccentric ellipses with aspect ratios up to 100; each entry carries a grid
/// size that resolves its support function.
std::vector<EllipseSpec> ellipse_battery(int base_grid);
SupportFunction make_battery_ellipse(const EllipseSpec& spec);

}  // namespace s1mk
