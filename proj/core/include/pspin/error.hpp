#pragma once

#include <stdexcept>
#include <string>

namespace pspin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when a tensor or enumeration would exceed its configured budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity appeared where the math guarantees a finite value.
class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

/// An experiment's checked inequality did not hold.
class AssertionViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace pspin
