#pragma once

#include <stdexcept>

namespace gslac {

// Error taxonomy mirrored by the CLI exit codes: config 2, I/O 3, numeric 4.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input trace is degenerate (flat): nothing to fit.
struct no_feature_error : numeric_error {
  using numeric_error::numeric_error;
};

// Gap minimization over the requested field range has no interior minimum.
struct no_crossing_error : numeric_error {
  using numeric_error::numeric_error;
};

}  // namespace gslac
