#pragma once

#include <stdexcept>
#include <string>

namespace kronoma {

/// Malformed input: bad flags, unreadable files, dimension mismatches.
/// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally valid request that cannot be satisfied at desk scale or at
/// all: size caps, enumeration caps, factors without a combining matrix.
/// The CLI maps this to exit code 3.
class InfeasibleError : public std::runtime_error {
  public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kronoma
