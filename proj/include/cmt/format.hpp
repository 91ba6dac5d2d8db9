#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <string>

namespace cmt {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_shortest(double v) {
  if (v == 0.0) return "0";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

/// Fixed 17-significant-digit rendering (CSV export).
inline std::string format_g17(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

}  // namespace cmt
