#pragma once

#include <stdexcept>
#include <string>

namespace cavsim {

/// Invalid configuration or CLI usage (maps to exit code 1).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numeric failure during integration or analysis (maps to exit code 2).
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated file.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace cavsim
