#pragma once

#include <stdexcept>
#include <string>

namespace spikelab {

// Invalid parameters, descriptors or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine failed to converge or overflowed. The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spikelab
