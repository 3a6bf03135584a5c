#pragma once

#include <stdexcept>
#include <string>

namespace ewsim {

/// Base class for all ewsim errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid input, configuration or domain violation (CLI exit code 1).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Physically infeasible request: the configured mirror cannot reflect the
/// atom (CLI exit code 2).
class NoBounceError : public Error {
public:
  using Error::Error;
};

/// Solver or integrator failure (CLI exit code 3).
class NumericError : public Error {
public:
  using Error::Error;
};

}  // namespace ewsim
