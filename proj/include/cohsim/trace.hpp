#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "cohsim/errors.hpp"
#include "cohsim/types.hpp"

namespace cohsim {

enum class LineKind : uint8_t { Record, Skip, Error };

/// Result of parsing a single trace line.  `column` is 1-based and points at
/// the offending character when kind == Error.
struct ParsedLine {
  LineKind kind = LineKind::Skip;
  MemoryRef ref{};
  std::string error;
  size_t column = 0;
};

/// Grammar per line: "<op> <core> <addr>" with single spaces, op in {L, S},
/// core a decimal in [0, 15], addr 0x-prefixed hex fitting 64 bits.  Blank
/// lines and lines beginning with '#' are skipped.
ParsedLine parse_trace_line(std::string_view line);

std::string format_trace_line(const MemoryRef& ref);

/// Pull-based reader over a stream; keeps only one line in memory.
class TraceReader {
 public:
  explicit TraceReader(std::istream& in) : in_(&in) {}

  /// Next record, skipping comments/blanks.  Throws TraceParseError on a
  /// malformed line and InputError if the stream fails mid-read.
  std::optional<MemoryRef> next();

  size_t line_number() const { return line_no_; }

 private:
  std::istream* in_;
  size_t line_no_ = 0;
  std::string buf_;
};

class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out) : out_(&out) {}

  void comment(std::string_view text);
  void write(const MemoryRef& ref);

 private:
  std::ostream* out_;
};

/// Scans a whole trace and returns max core id + 1 (i.e. the inferred core
/// count), or nullopt for a trace with no records.  Throws on parse errors.
std::optional<int> infer_core_count(std::istream& in);

}  // namespace cohsim
