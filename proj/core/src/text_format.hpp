#pragma once

#include <cstdio>
#include <string>

namespace steklov::detail {

/// Shortest round-trippable decimal form of a double; used by every text
/// serializer so that save/load round trips are bit-exact.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace steklov::detail
