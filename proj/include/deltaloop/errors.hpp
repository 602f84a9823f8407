#pragma once

#include <stdexcept>
#include <string>

namespace deltaloop {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold for the given
/// input (bad curve, inadmissible coupling, grid violating the margin rule).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its stated tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace deltaloop
