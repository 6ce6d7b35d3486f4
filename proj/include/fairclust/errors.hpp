#pragma once

#include <stdexcept>
#include <string>

namespace fairclust {

/// Invalid configuration or structurally malformed input (bad shapes, schema).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Value outside its mathematical domain (negative probability, mismatched
/// lengths, empty batch).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Constraint system admits no integral solution. The message names the
/// violated aggregate so callers can widen the relaxation.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite value produced where a finite one is required.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// File or format failure, with located context where available.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fairclust
