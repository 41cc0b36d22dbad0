#pragma once

#include <stdexcept>
#include <string>

namespace subloo {

// Exit-code contract for the CLI: 2 validation, 3 degeneracy, 4 internal.

// Bad inputs: shape mismatches, out-of-range parameters, unparseable files.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerically degenerate state: rank loss, non-PSD covariance, diverging
// optimizer. The inputs were well-formed but the computation cannot proceed.
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariant. Reaching this is a bug.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

#define SUBLOO_CHECK(cond, msg)                                   \
  do {                                                            \
    if (!(cond)) throw ::subloo::InternalError(msg);              \
  } while (0)

}  // namespace subloo
