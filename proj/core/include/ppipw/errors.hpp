#pragma once

#include <stdexcept>
#include <string>

namespace ppipw {

/// Input failed a structural precondition (sizes, ranges, missing columns).
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A privacy budget outside the open intervals required by the Gaussian
/// mechanism used here (epsilon and delta both strictly inside (0,1)).
class BudgetError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

/// An untrimmed IPW denominator hit 0 or 1 exactly.
class PositivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV ingestion failure; carries row/column context in the message.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimization produced a non-finite loss.
class OptimizationError : public std::runtime_error {
 public:
  OptimizationError(const std::string& what, long iteration)
      : std::runtime_error(what), iteration(iteration) {}
  long iteration;
};

}  // namespace ppipw
