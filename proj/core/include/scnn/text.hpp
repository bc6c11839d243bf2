#pragma once

#include <charconv>
#include <string>

namespace scnn {

/// Shortest round-trip decimal form of a double, '.' separator, no locale.
inline std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace scnn
