#pragma once

#include <stdexcept>
#include <string>

namespace rltest {

// Malformed or inconsistent configuration, including incompatible
// task / algorithm combinations. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed data files or numerical failure while running (e.g. divergence).
// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rltest
