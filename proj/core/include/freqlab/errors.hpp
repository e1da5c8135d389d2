#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace freqlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct ValidityError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct FrequencyError : Error { using Error::Error; };
struct EmptyInputError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };
struct AnchorError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// Raised when a training run produces a non-finite loss. Carries the
// optimizer step index at which the loss first went non-finite.
struct DivergenceError : Error {
  DivergenceError(const std::string& msg, std::size_t step_index)
      : Error(msg), step(step_index) {}
  std::size_t step;
};

}  // namespace freqlab
