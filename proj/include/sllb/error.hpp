#pragma once

#include <stdexcept>
#include <string>

namespace sllb {

// Rejected input: bad shapes, layouts, labels, config fields. CLI exit code 1.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Failure while running: divergence, IO errors, corrupt files. CLI exit code 2.
struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sllb
