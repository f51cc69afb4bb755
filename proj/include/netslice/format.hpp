#pragma once

#include <charconv>
#include <string>

namespace netslice {

/// Shortest decimal text that round-trips to the same double.
inline std::string fmt_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace netslice
