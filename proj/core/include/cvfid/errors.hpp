#pragma once

#include <stdexcept>
#include <string>

namespace cvfid {

// Bad input: parameter out of range, unknown label, shape mismatch.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown: non-finite values, non-integrable directions,
// matrices that should be positive definite but are not.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cvfid
