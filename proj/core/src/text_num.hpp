#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace rltest::detail {

// Shortest decimal text that round-trips the exact double value.
inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline std::string double_to_text(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

}  // namespace rltest::detail
