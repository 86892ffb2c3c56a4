#pragma once

#include <stdexcept>
#include <string>

namespace riesz {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameter / configuration errors.
struct DimensionError : Error {
  using Error::Error;
};
struct SignError : Error {
  using Error::Error;
};
struct SubcriticalityError : Error {
  using Error::Error;
};
struct OutOfRangeError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// Numeric failures.
struct DivergentNormError : Error {
  using Error::Error;
};
struct UnsupportedForm : Error {
  using Error::Error;
};
struct SingularArgumentError : Error {
  using Error::Error;
};
struct QuadratureError : Error {
  using Error::Error;
};
struct NotInLError : Error {
  using Error::Error;
};
struct UnsupportedDimension : Error {
  using Error::Error;
};
struct InsufficientData : Error {
  using Error::Error;
};
struct NonPositiveIterate : Error {
  using Error::Error;
};

}  // namespace riesz
