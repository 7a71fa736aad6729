#include "cohsim/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>

namespace cohsim {

namespace {

ParsedLine err(std::string reason, size_t column) {
  ParsedLine p;
  p.kind = LineKind::Error;
  p.error = std::move(reason);
  p.column = column;
  return p;
}

int format_into(char (&buf)[48], const MemoryRef& ref) {
  return std::snprintf(buf, sizeof buf, "%c %d 0x%llx", ref.op == Op::Load ? 'L' : 'S',
                       ref.core, static_cast<unsigned long long>(ref.addr));
}

}  // namespace

ParsedLine parse_trace_line(std::string_view line) {
  // Tolerate a trailing CR so CRLF traces from other tools still parse.
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.empty() || line[0] == '#') return {};
  if (line.find_first_not_of(" \t") == std::string_view::npos) return {};

  MemoryRef ref;
  if (line[0] == 'L') {
    ref.op = Op::Load;
  } else if (line[0] == 'S') {
    ref.op = Op::Store;
  } else {
    return err("expected op 'L' or 'S'", 1);
  }

  size_t pos = 1;
  if (pos >= line.size() || line[pos] != ' ')
    return err("expected single space after op", pos + 1);
  ++pos;

  const size_t core_col = pos + 1;
  int core = -1;
  const char* end = line.data() + line.size();
  auto [core_ptr, core_ec] = std::from_chars(line.data() + pos, end, core);
  if (core_ec != std::errc{} || core_ptr == line.data() + pos)
    return err("expected core id", core_col);
  if (core < 0 || core >= kMaxCores)
    return err("core id out of range (0-15)", core_col);
  pos = static_cast<size_t>(core_ptr - line.data());
  if (pos >= line.size() || line[pos] != ' ')
    return err("expected single space after core id", pos + 1);
  ++pos;

  const size_t addr_col = pos + 1;
  if (pos + 2 > line.size() || line[pos] != '0' || line[pos + 1] != 'x')
    return err("expected 0x-prefixed hex address", addr_col);
  pos += 2;
  uint64_t addr = 0;
  auto [addr_ptr, addr_ec] = std::from_chars(line.data() + pos, end, addr, 16);
  if (addr_ptr == line.data() + pos)
    return err("expected hex digits after 0x", pos + 1);
  if (addr_ec == std::errc::result_out_of_range)
    return err("address overflows 64 bits", addr_col);
  pos = static_cast<size_t>(addr_ptr - line.data());
  if (pos != line.size()) return err("trailing characters after address", pos + 1);

  ref.core = core;
  ref.addr = addr;
  ParsedLine p;
  p.kind = LineKind::Record;
  p.ref = ref;
  return p;
}

std::string format_trace_line(const MemoryRef& ref) {
  char buf[48];
  const int n = format_into(buf, ref);
  return std::string(buf, static_cast<size_t>(n));
}

std::optional<MemoryRef> TraceReader::next() {
  while (std::getline(*in_, buf_)) {
    ++line_no_;
    ParsedLine p = parse_trace_line(buf_);
    if (p.kind == LineKind::Record) return p.ref;
    if (p.kind == LineKind::Error) throw TraceParseError(p.error, line_no_, p.column);
  }
  if (in_->bad()) throw InputError("trace stream failed while reading");
  return std::nullopt;
}

void TraceWriter::comment(std::string_view text) {
  *out_ << "# " << text << '\n';
}

void TraceWriter::write(const MemoryRef& ref) {
  char buf[48];
  const int n = format_into(buf, ref);
  out_->write(buf, n);
  out_->put('\n');
}

std::optional<int> infer_core_count(std::istream& in) {
  TraceReader reader(in);
  int max_core = -1;
  while (auto ref = reader.next()) max_core = std::max(max_core, ref->core);
  if (max_core < 0) return std::nullopt;
  return max_core + 1;
}

}  // namespace cohsim
