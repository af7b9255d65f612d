#pragma once

#include <stdexcept>
#include <string>

namespace dds {

// Bad user-facing configuration: unknown keys, invalid thresholds, shape
// mismatches at module boundaries. CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values, divergence, NaN gradients. CLI maps this to exit code 2.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or truncated files.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dds
