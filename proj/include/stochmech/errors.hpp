#pragma once

#include <stdexcept>
#include <string>

namespace stochmech {

// Invalid parameters, grids or run configuration.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input that admits no meaningful numerical result (e.g. an empty histogram).
class DegenerateInputError : public std::runtime_error {
public:
  explicit DegenerateInputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Arguments outside the mathematical domain of an operation.
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested evaluation mode cannot handle the given data.
class UnsupportedModeError : public std::runtime_error {
public:
  explicit UnsupportedModeError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace stochmech
