#pragma once

#include <stdexcept>
#include <string>

namespace entlab {

// Invalid user-supplied input (bad measure, malformed word, out-of-range
// parameter). The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation could not meet its numeric contract (no bracket, residual
// above tolerance, infeasible truncation). The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two measures expected to share support do not.
struct SupportMismatch : NumericError {
  using NumericError::NumericError;
};

// An enumeration or convolution would exceed the configured element cap.
struct BallCapExceeded : NumericError {
  using NumericError::NumericError;
};

}  // namespace entlab
