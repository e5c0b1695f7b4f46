#pragma once

#include <stdexcept>
#include <string>

namespace anovox {

/// Invalid arguments, violated invariants or malformed inputs.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem and codec failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace anovox
