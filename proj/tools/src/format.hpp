#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace dburr::cli {

// Shortest text that parses back to the same double.
inline std::string format_full(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace dburr::cli
