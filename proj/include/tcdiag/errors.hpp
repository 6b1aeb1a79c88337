#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tcdiag {

// Error raised when a text artifact (dataset, model, trace CSV, report) is
// malformed. Carries the 1-based line number when one is known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line = 0)
      : std::runtime_error(line > 0 ? message + " (line " + std::to_string(line) + ")"
                                    : message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace tcdiag
