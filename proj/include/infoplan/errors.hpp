#pragma once

#include <stdexcept>
#include <string>

namespace infoplan {

/// Base class for all library failures so callers can catch one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user input: bad configuration values, inconsistent dimensions,
/// out-of-range windows. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appearing during integration.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A matrix required to be positive definite failed factorization even
/// after the jitter retry.
class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

/// The verification spec cannot be differentiated to white noise within the
/// allowed order, or the noise coupling has inadmissible rank structure.
class AssumptionViolationError : public Error {
 public:
  using Error::Error;
};

/// Verification geometry degenerate: zero verification matrix, or a pinned
/// covariance that cannot be conditioned.
class DegenerateVerificationError : public Error {
 public:
  using Error::Error;
};

/// An internal quantity violated a property the math guarantees
/// (a determinant with the wrong sign, a failed inversion of I + Q Delta).
class NumericalConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Combinatorial search size above the configured budget.
class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

}  // namespace infoplan
