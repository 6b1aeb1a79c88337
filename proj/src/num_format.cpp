#include "tcdiag/num_format.hpp"

#include <algorithm>
#include <cmath>

namespace tcdiag {

namespace {

bool round_trips(const char* first, const char* last, double v) {
  double back = 0.0;
  auto res = std::from_chars(first, last, back);
  return res.ec == std::errc() && res.ptr == last && back == v;
}

}  // namespace

std::string format_voltage(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string_view shortest(buf, static_cast<std::size_t>(res.ptr - buf));
  const bool scientific = shortest.find_first_of("eE") != std::string_view::npos;
  if (!scientific) {
    std::string s(shortest);
    auto dot = s.find('.');
    if (dot == std::string::npos) {
      s += ".000";
    } else {
      std::size_t frac = s.size() - dot - 1;
      while (frac < 3) {
        s += '0';
        ++frac;
      }
    }
    return s;
  }
  // Rare path (tiny magnitudes): grow fixed precision until lossless.
  for (int precision = 3; precision <= 25; ++precision) {
    auto fixed = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
    if (fixed.ec == std::errc() && round_trips(buf, fixed.ptr, v)) {
      return std::string(buf, fixed.ptr);
    }
  }
  return format_double(v);  // unreachable for finite inputs
}

double parse_double_token(std::string_view token, bool& ok) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  ok = res.ec == std::errc() && res.ptr == token.data() + token.size() && std::isfinite(v);
  return v;
}

std::int64_t parse_int_token(std::string_view token, bool& ok) {
  std::int64_t v = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  ok = res.ec == std::errc() && res.ptr == token.data() + token.size();
  return v;
}

std::uint64_t parse_u64_token(std::string_view token, bool& ok) {
  std::uint64_t v = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  ok = res.ec == std::errc() && res.ptr == token.data() + token.size();
  return v;
}

}  // namespace tcdiag
