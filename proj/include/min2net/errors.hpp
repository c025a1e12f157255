#pragma once

#include <stdexcept>
#include <string>

namespace min2net {

/// Invalid user-supplied configuration or arguments (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor shapes that do not compose.
class DimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A batch that cannot yield a single anchor/positive/negative triplet.
class BatchCompositionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written (CLI exit code 1).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checksum, magic or version mismatch in a persisted file.
class IntegrityError : public IoError {
 public:
  using IoError::IoError;
};

/// Gradient or loss became NaN/Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace min2net
