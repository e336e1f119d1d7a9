#pragma once

#include <stdexcept>
#include <string>

namespace polarfront {

// Shape or size disagreement between tensors. Messages carry both shapes.
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Out-of-range class index or element index.
struct IndexError : std::runtime_error {
  explicit IndexError(const std::string& msg) : std::runtime_error(msg) {}
};

// Misuse of a stateful object (e.g. backward called twice on one tape).
struct StateError : std::runtime_error {
  explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed on-disk data (IDX files, checkpoints).
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid run configuration (schedules, attack specs, CLI arguments).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument value (non-monotone thresholds, zero filters, ...).
struct ArgumentError : std::runtime_error {
  explicit ArgumentError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace polarfront
