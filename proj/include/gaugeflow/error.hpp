#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace gaugeflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.3e formatting for numbers quoted in error messages.
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace gaugeflow
