#pragma once

#include <stdexcept>
#include <string>

namespace densal {

// Base for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or parameterization (rejected preconditions on
// user-supplied settings). The CLI maps this to its own exit code.
struct ConfigError : Error {
  using Error::Error;
};

// A required input artifact (file produced by an earlier pipeline stage)
// is missing or unreadable.
struct PrerequisiteError : Error {
  using Error::Error;
};

}  // namespace densal
