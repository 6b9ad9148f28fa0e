#pragma once

#include <stdexcept>
#include <string>

namespace agginc {

/// Malformed or inconsistent data (dimension mismatch, too few samples, parse failures).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data that is well formed but degenerate, e.g. all points identical.
class DegenerateDataError : public InputError {
 public:
  using InputError::InputError;
};

/// Invalid test or kernel configuration (bandwidths, levels, design sizes).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace agginc
