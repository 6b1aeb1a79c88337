#include "tcdiag/text_parse.hpp"

#include <fstream>
#include <sstream>

#include "tcdiag/errors.hpp"
#include "tcdiag/num_format.hpp"

namespace tcdiag {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ') ++pos;
    if (pos > start) tokens.push_back(line.substr(start, pos - start));
  }
  return tokens;
}

double need_double(std::string_view token, std::size_t line_no, const char* what) {
  bool ok = false;
  const double v = parse_double_token(token, ok);
  if (!ok) throw ParseError(std::string("bad ") + what, line_no);
  return v;
}

std::int64_t need_int(std::string_view token, std::size_t line_no, const char* what) {
  bool ok = false;
  const std::int64_t v = parse_int_token(token, ok);
  if (!ok) throw ParseError(std::string("bad ") + what, line_no);
  return v;
}

std::uint64_t need_u64(std::string_view token, std::size_t line_no, const char* what) {
  bool ok = false;
  const std::uint64_t v = parse_u64_token(token, ok);
  if (!ok) throw ParseError(std::string("bad ") + what, line_no);
  return v;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tcdiag
