#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fsracer {

// Return value of a traced call. strace prints `= 3`, `= -1 ENOENT (...)`,
// or `= ?` when the call never returned.
struct Retval {
  int64_t value = 0;
  std::string err;      // errno name, empty on success
  bool known = true;    // false for "= ?"

  bool ok() const { return known && err.empty(); }

  friend bool operator==(const Retval& a, const Retval& b) {
    return a.value == b.value && a.err == b.err && a.known == b.known;
  }
};

// One complete parsed strace line. Arguments are kept as raw top-level
// tokens; the modeler decides what each position means.
struct TraceEntry {
  int64_t pid = 0;
  std::string name;
  std::vector<std::string> args;
  Retval retval;
  std::string raw_line;
  uint64_t line_no = 0;

  // Re-render in strace's own format (raw_line/line_no excluded).
  std::string render() const;

  friend bool operator==(const TraceEntry& a, const TraceEntry& b) {
    return a.pid == b.pid && a.name == b.name && a.args == b.args && a.retval == b.retval;
  }
};

}  // namespace fsracer
