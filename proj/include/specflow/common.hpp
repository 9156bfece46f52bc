#pragma once

#include <stdexcept>
#include <string>

namespace specflow {

inline constexpr const char* kVersion = "0.1.0";

// Stand-in for an unbounded side of a check interval. Kept finite so report
// rows stay representable in JSON.
inline constexpr double kUnbounded = 1.0e300;

// Malformed or inconsistent user input (configs, schemas, bad parameters).
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical guard tripped: window truncation, vanishing density ratio,
// resolution too coarse. The computation cannot be trusted, so we stop
// instead of returning a wrong number. CLI exit code 3.
struct NumericGuardError : std::runtime_error {
  explicit NumericGuardError(const std::string& msg) : std::runtime_error(msg) {}
};

// CLI exit code 4.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace specflow
