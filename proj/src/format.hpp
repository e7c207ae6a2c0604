#pragma once

// Shortest round-trip text for doubles, shared by every writer in the library.

#include "bottleneck/errors.hpp"

#include <charconv>
#include <string>
#include <string_view>

namespace bottleneck {

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view text, const std::string& field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError(field, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace bottleneck
