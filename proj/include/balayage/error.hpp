#pragma once

#include <stdexcept>
#include <string>

namespace balayage {

/// Invalid input: out-of-range parameters, malformed domains or files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not deliver a result with the requested guarantees.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace balayage
