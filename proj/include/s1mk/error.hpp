#pragma once

#include <stdexcept>
#include <string>

namespace s1mk {

enum class ErrorCode {
  invalid_argument,
  not_in_k0,
  nonconvex,
  origin_on_boundary,
  singular_density,
  unsupported,
  domain_error,
  hypothesis_violation,
  numerical_failure,
  stagnation,
  singular_linearization,
  io,
};

const char* to_string(ErrorCode code);

/// Base exception for every failure raised by the library. Derived classes
/// attach payloads (worst grid point, best iterate, solver trace).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// h'' + h dropped below the convexity tolerance.
class NonconvexError : public Error {
 public:
  NonconvexError(int index, double theta, double value);

  int index() const noexcept { return index_; }
  double theta() const noexcept { return theta_; }
  double value() const noexcept { return value_; }

 private:
  int index_;
  double theta_;
  double value_;
};

}  // namespace s1mk
