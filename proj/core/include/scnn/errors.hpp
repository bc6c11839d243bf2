#pragma once

#include <stdexcept>
#include <string>

namespace scnn {

// Error taxonomy mirrors the CLI exit codes: ConfigError -> 2, DataError -> 3,
// NumericError -> 4. Anything else is a plain std::runtime_error / logic_error.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scnn
