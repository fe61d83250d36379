#pragma once

#include <stdexcept>
#include <string>

namespace screenlab {

// Bad input: wrong dimensions, out-of-range parameters, non-SPD matrices.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A solver or quadrature failed to meet its tolerance.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Broken internal invariant (should be unreachable).
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace screenlab
