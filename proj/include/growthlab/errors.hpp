#pragma once

#include <stdexcept>
#include <string>

namespace growthlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An input violates an operation's precondition (e.g. fJ overlaps J).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An iterative method (root-find, quadrature) failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A mathematical invariant of a domain object was observed to fail.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace growthlab
