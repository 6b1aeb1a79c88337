#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tcdiag {

// Forward-only reader over an in-memory text buffer. Handles LF and CRLF and
// tracks 1-based line numbers for error reporting.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end < text_.size() ? end + 1 : text_.size();
    ++line_no_;
    return true;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

// Splits on runs of spaces; no escaping.
std::vector<std::string_view> split_ws(std::string_view line);

// Token conversions that raise ParseError (tagged with the line number).
double need_double(std::string_view token, std::size_t line_no, const char* what);
std::int64_t need_int(std::string_view token, std::size_t line_no, const char* what);
std::uint64_t need_u64(std::string_view token, std::size_t line_no, const char* what);

// Reads a whole file into memory; raises ParseError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tcdiag
