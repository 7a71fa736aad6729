#pragma once

#include <stdexcept>
#include <string>

namespace cohsim {

/// Bad input data: unreadable files, malformed traces, impossible configs.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceParseError : InputError {
  TraceParseError(std::string what_reason, size_t line_no, size_t column_no)
      : InputError("line " + std::to_string(line_no) + ", column " +
                   std::to_string(column_no) + ": " + what_reason),
        reason(std::move(what_reason)),
        line(line_no),
        column(column_no) {}

  std::string reason;
  size_t line;
  size_t column;
};

}  // namespace cohsim
