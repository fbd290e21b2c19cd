#pragma once

#include <stdexcept>
#include <string>

namespace tda {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension disagreement anywhere in the stack.
struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(what) {}
};

/// A value that should be finite is NaN or infinite.
struct NonFiniteError : Error {
  explicit NonFiniteError(const std::string& what) : Error(what) {}
};

/// Bad user configuration (unknown key, malformed value, invalid combination).
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Filesystem / parse failure on an external artifact.
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace tda
