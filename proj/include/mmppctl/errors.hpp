#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmppctl {

/// Base of every error raised by the library. `name()` is the stable identifier
/// printed by the CLI on failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view name() const noexcept = 0;
};

/// Invalid problem data (bad generator, cost family, partition, ...).
class InvalidModel : public Error {
 public:
  using Error::Error;
  std::string_view name() const noexcept override { return "InvalidModel"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  std::string_view name() const noexcept override { return "ConfigError"; }
};

class DegeneratePartition : public InvalidModel {
 public:
  using InvalidModel::InvalidModel;
  std::string_view name() const noexcept override { return "DegeneratePartition"; }
};

/// Failures of the numerical machinery itself; the CLI maps these to exit code 2.
class NumericError : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public NumericError {
 public:
  using NumericError::NumericError;
  std::string_view name() const noexcept override { return "SingularSystem"; }
};

class NonConvergence : public NumericError {
 public:
  using NumericError::NumericError;
  std::string_view name() const noexcept override { return "NonConvergence"; }
};

class Unstable : public NumericError {
 public:
  using NumericError::NumericError;
  std::string_view name() const noexcept override { return "Unstable"; }
};

class ReducibleChain : public NumericError {
 public:
  using NumericError::NumericError;
  std::string_view name() const noexcept override { return "ReducibleChain"; }
};

}  // namespace mmppctl
