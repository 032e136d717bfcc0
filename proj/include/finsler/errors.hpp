#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Base class for every error raised by the library.
class FinslerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed descriptor or metric specification.
class ParseError : public FinslerError {
 public:
  using FinslerError::FinslerError;
};

/// A point lies outside the domain of a metric or origin function.
class DomainError : public FinslerError {
 public:
  using FinslerError::FinslerError;
};

/// The fundamental tensor is not positive definite where it must be inverted.
class SingularMetricError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A fixed-point solve failed to bracket or converge.
class SolverError : public FinslerError {
 public:
  using FinslerError::FinslerError;
};

/// A complex square root was asked for a value on its branch cut.
class BranchCutError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace finsler
