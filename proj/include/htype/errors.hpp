#pragma once

#include <stdexcept>
#include <string>

namespace htype {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments (k = 0, lambda <= 0, malformed point strings, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A module that fails verify_clifford was passed where a verified one is required.
class UnverifiedModule : public Error {
 public:
  using Error::Error;
};

/// Point where the spherical inversion is undefined.
class SingularPoint : public Error {
 public:
  using Error::Error;
};

/// The ratio -Delta U / U^{(Q+2)/(Q-2)} is not constant: the group-law constant
/// and the profile constant disagree.
class ConventionMismatch : public Error {
 public:
  using Error::Error;
};

/// A numerical rank decision without a clear spectral gap.
class RankAmbiguity : public Error {
 public:
  using Error::Error;
};

/// The antisymmetrization restricted to D lost rank.
class InjectivityLoss : public Error {
 public:
  using Error::Error;
};

/// The connection's defining system does not have a unique solution.
class UniquenessViolation : public Error {
 public:
  using Error::Error;
};

/// The conformal scalar-curvature formula failed to verify.
class TheoremViolation : public Error {
 public:
  using Error::Error;
};

/// The group is not of Iwasawa type but the operation requires it.
class NotIwasawa : public Error {
 public:
  using Error::Error;
};

/// A positive field was required.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed fixture / report file.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace htype
