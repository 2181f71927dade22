#pragma once

#include <stdexcept>
#include <string>

namespace nvt {

// Error categories mirrored by the CLI exit codes: configuration problems
// (2), resource guard violations (3), numerical/engine failures (4).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct EngineError : std::runtime_error {
  explicit EngineError(const std::string& msg) : std::runtime_error(msg) {}
};

struct KrylovError : EngineError {
  double residual;
  KrylovError(const std::string& msg, double res) : EngineError(msg), residual(res) {}
};

}  // namespace nvt
