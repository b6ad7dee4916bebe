#pragma once

#include <stdexcept>
#include <string>

namespace swtex {

// Error taxonomy shared by every module. Callers that only care about
// "something failed" can catch std::runtime_error / std::logic_error.

/// Precondition violated by the caller (shape mismatch, zero sizes, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Filesystem or decoding failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration inconsistent with the data it is applied to
/// (unknown layer tag, checksum mismatch, malformed config file).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An optional backend was requested but is not available.
class FeatureDisabled : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void throw_invalid(const std::string& what);

}  // namespace swtex
