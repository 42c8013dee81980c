#pragma once

#include <stdexcept>
#include <string>

namespace rmtl {

// Bad input: malformed data, out-of-range parameters, missing tau.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Input was well formed but the computation has no meaningful answer,
// e.g. a zero variance with a non-zero difference.
class DegenerateError : public std::runtime_error {
 public:
  explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rmtl
