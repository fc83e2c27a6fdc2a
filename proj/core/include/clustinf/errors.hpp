#ifndef CLUSTINF_ERRORS_HPP_
#define CLUSTINF_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace clustinf {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input: non-finite data, negative penalty, dimension mismatch, ...
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The exhaustive solver was asked for a problem too large to enumerate.
class OracleSizeExceeded : public Error {
 public:
  using Error::Error;
};

/// An operation requiring at least two clusters received fewer.
class NotEnoughClusters : public Error {
 public:
  using Error::Error;
};

/// Truncation interval collapsed (lower bound >= upper bound).
class DegenerateTruncation : public Error {
 public:
  using Error::Error;
};

/// The observation does not satisfy the conditioning event it was paired with.
class InconsistentConditioning : public Error {
 public:
  using Error::Error;
};

/// The requested contrast does not exist for the realized clustering.
class UndefinedContrast : public Error {
 public:
  using Error::Error;
};

/// A covariance factorization failed (matrix not symmetric positive definite).
class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace clustinf

#endif  // CLUSTINF_ERRORS_HPP_
