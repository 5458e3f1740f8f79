#pragma once

#include <stdexcept>
#include <string>

namespace semcache {

/// Invalid run configuration: unknown policy, bad parameter, incompatible trace.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace semcache
