#pragma once

#include <stdexcept>
#include <string>

namespace sonolab {

/// Base for all library errors. CLI maps subclasses to exit codes:
/// ConfigError -> 2, AnalysisError -> 4, anything else -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration or parameters supplied by the caller.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

/// An operation was asked for something its model cannot represent.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

/// Numerical run completed but its output fails a quality gate.
class AnalysisError : public Error {
 public:
  explicit AnalysisError(const std::string& msg) : Error(msg) {}
};

/// Integration step control failed (step too large, halvings exhausted).
class StepError : public Error {
 public:
  explicit StepError(const std::string& msg) : Error(msg) {}
};

/// Norm drift, NaN in state, or other propagation breakdown.
class PropagationError : public Error {
 public:
  explicit PropagationError(const std::string& msg) : Error(msg) {}
};

/// File write/read-back failures around run outputs.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace sonolab
