#include "s1mk/error.hpp"

namespace s1mk {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::not_in_k0: return "not-in-K0";
    case ErrorCode::nonconvex: return "nonconvex";
    case ErrorCode::origin_on_boundary: return "origin-on-boundary";
    case ErrorCode::singular_density: return "singular-density";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::domain_error: return "domain-error";
    case ErrorCode::hypothesis_violation: return "hypothesis-violation";
    case ErrorCode::numerical_failure: return "numerical-failure";
    case ErrorCode::stagnation: return "stagnation";
    case ErrorCode::singular_linearization: return "singular-linearization";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

NonconvexError::NonconvexError(int index, double theta, double value)
    : Error(ErrorCode::nonconvex,
            "h'' + h = " + std::to_string(value) + " at grid point " + std::to_string(index) +
                " (theta = " + std::to_string(theta) + ")"),
      index_(index),
      theta_(theta),
      value_(value) {}

}  // namespace s1mk
