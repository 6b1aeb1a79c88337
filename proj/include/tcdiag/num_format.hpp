#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>

namespace tcdiag {

// Shortest decimal string that parses back to exactly the same double.
// Used by every artifact writer so that serialization is lossless and
// byte-stable across runs.
inline void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

// Trace CSV voltage field: fixed-point decimal with at least 3 fractional
// digits, still parsing back to exactly the same double. The shortest
// round-trip form is used when it already satisfies the format; otherwise the
// precision is grown until the fixed form round-trips.
std::string format_voltage(double v);

// Parses a full token as a double; ok=false when the token is empty, has
// trailing garbage, or is not finite.
double parse_double_token(std::string_view token, bool& ok);

// Parses a full token as a signed integer.
std::int64_t parse_int_token(std::string_view token, bool& ok);

// Parses a full token as an unsigned 64-bit integer (decimal).
std::uint64_t parse_u64_token(std::string_view token, bool& ok);

}  // namespace tcdiag
