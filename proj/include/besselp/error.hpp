#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace besselp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument or a value-type invariant was violated.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Adaptive quadrature hit its depth or panel cap before meeting the tolerance.
class AccuracyNotReached : public Error {
 public:
  AccuracyNotReached(const std::string& what, double estimate, double error_estimate)
      : Error(what), estimate_(estimate), error_estimate_(error_estimate) {}

  double estimate() const { return estimate_; }
  double error_estimate() const { return error_estimate_; }

 private:
  double estimate_;
  double error_estimate_;
};

// Failure of one element in a batched evaluation; carries the element index.
class BatchError : public Error {
 public:
  BatchError(std::size_t index, const std::string& what)
      : Error("query " + std::to_string(index) + ": " + what), index_(index) {}

  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// Whitney decomposition requested for a set whose complement in (0, inf) is empty.
class ComplementEmpty : public Error {
 public:
  using Error::Error;
};

// The requested dyadic resolution cannot represent the input.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Level sets of the adjoint potential are not resolved by the sampling grid.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

// Malformed or invariant-violating measure file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace besselp
