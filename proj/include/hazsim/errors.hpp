#pragma once

#include <stdexcept>
#include <string>

namespace hazsim {

// Base class for all failures raised by this library.
class HazError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (bad syntax, wrong field types, truncated records).
class ParseError : public HazError {
 public:
  using HazError::HazError;
};

// Structurally valid input that violates a model invariant.
class ValidationError : public HazError {
 public:
  using HazError::HazError;
};

// Bad run configuration (missing files, unknown keys, out-of-range values).
class ConfigError : public HazError {
 public:
  using HazError::HazError;
};

}  // namespace hazsim
