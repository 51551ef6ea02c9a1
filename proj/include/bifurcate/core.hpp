// Scalar type and error hierarchy shared by every module.
#pragma once

#include <stdexcept>
#include <string>

namespace bifurcate {

// The 1/h^2 scale of the stencil puts the double-precision residual floor
// near 1e-10 at the default grid, so all state lives in extended precision.
using Real = long double;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments: bad grid sizes, mismatched domains, out-of-range k.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Model parameters violate a structural hypothesis (e.g. f not C^2).
class ModelError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

}  // namespace bifurcate
