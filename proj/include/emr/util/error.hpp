#pragma once

#include <stdexcept>
#include <string>

namespace emr {

/// Bad input data (malformed files, violated preconditions on data). The CLI
/// maps it to exit code 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Misconfiguration: missing tools, invalid settings. The CLI maps it to exit
/// code 2 so it is never confused with a low score.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace emr
