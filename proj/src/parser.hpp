#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "diagnostics.hpp"
#include "trace.hpp"

namespace fsracer {

// Thrown when the stream does not look like strace output at all.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

enum class OpenFlag : uint8_t {
  read = 1,
  write = 2,
  trunc = 4,
  creat = 8,
};

struct OpenFlagSet {
  uint8_t bits = 0;
  bool has(OpenFlag f) const { return bits & static_cast<uint8_t>(f); }
  void set(OpenFlag f) { bits |= static_cast<uint8_t>(f); }
  friend bool operator==(OpenFlagSet a, OpenFlagSet b) { return a.bits == b.bits; }
};

// Maps a `|`-separated strace flag expression (e.g. "O_RDWR|O_CREAT") to the
// four access primitives. An unrecognized access mode falls back to read and
// is counted as a diagnostic.
OpenFlagSet parse_open_flags(std::string_view token, Diagnostics* diag = nullptr);

// Decode a quoted strace string literal ("..." with C escapes). Returns the
// payload bytes; *truncated is set when the literal carries strace's trailing
// "..." abbreviation marker.
std::string decode_string_token(std::string_view token, bool* truncated = nullptr);

// True when `token` is a quoted string literal cut short by strace -s.
bool token_is_truncated_string(std::string_view token);

// Streaming strace reader. Pulls one line at a time, stitching
// unfinished/resumed call halves, and yields complete entries in trace order
// (a merged call surfaces at its resumed position). Signal stops, exit
// markers, and garbage lines are skipped and counted.
class TraceParser {
 public:
  // `want_args` limits full argument tokenization to interesting syscalls;
  // everything else keeps name and retval only. Null means tokenize all.
  using NameFilter = std::function<bool(std::string_view)>;

  TraceParser(std::istream& in, Diagnostics& diag, NameFilter want_args = nullptr);

  std::optional<TraceEntry> next();

  uint64_t lines_read() const { return _line_no; }
  uint64_t bytes_read() const { return _bytes; }
  uint64_t entries_emitted() const { return _entries; }

 private:
  std::istream& _in;
  Diagnostics& _diag;
  NameFilter _want_args;
  uint64_t _line_no = 0;
  uint64_t _bytes = 0;
  uint64_t _entries = 0;
  bool _saw_valid_line = false;
  std::string _line;

  // (pid, syscall) -> partial argument text from the unfinished half
  std::unordered_map<std::string, std::string> _pending;

  bool parse_line(TraceEntry* out);
};

}  // namespace fsracer
