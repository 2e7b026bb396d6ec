#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace randcollect {

using NodeId = std::uint32_t;

// Invalid topology parameters, malformed spec files, broken preconditions.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular linear systems, failed residual post-checks, non-reversible input
// where a reversible chain is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An exact-enumeration quantity was requested on a graph above the subset
// brute-force cap and no closed form is registered for its family.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All floating point output goes through this: 12 significant digits,
// C-locale '.' decimal point, so files are byte-stable across runs.
inline std::string fmt_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace randcollect
