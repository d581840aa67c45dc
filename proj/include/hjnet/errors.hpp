#pragma once

#include <stdexcept>
#include <string>

namespace hjnet {

// Bad or non-finite input data (initial datum, sampled values).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A structural hypothesis failed a check (monotonicity, unimodality, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numerical procedure failed (blow-up, non-bracketable root).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed configuration file or invalid experiment request.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hjnet
