#pragma once

#include <cstdio>
#include <string>

namespace rsjd {

/// Shortest-safe text form of a double: '.' decimal separator, 17
/// significant digits, so values survive a text round trip.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace rsjd
