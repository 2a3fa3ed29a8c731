#pragma once

#include <stdexcept>
#include <string>

namespace hmmdecode {

// Malformed input: unparseable files, unknown tokens, invalid arguments.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A decode request on a sequence that no state path can generate.
class ZeroProbabilityError : public std::runtime_error {
 public:
  ZeroProbabilityError() : std::runtime_error("no generating path: sequence has probability 0") {}
  using std::runtime_error::runtime_error;
};

// A configured resource cap (state count, path count, subset count, search
// nodes) would be exceeded.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arithmetic between a log-space value and an exact rational.
class BackendMismatch : public std::logic_error {
 public:
  BackendMismatch() : std::logic_error("probability backend mismatch (log vs exact)") {}
};

}  // namespace hmmdecode
