#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fsracer {

// Shared counters for everything the pipeline tolerates instead of failing on.
// The analysis never aborts mid-trace; it counts and keeps going.
struct Diagnostics {
  uint64_t skipped_lines = 0;     // signals, exits, unparseable lines
  uint64_t merged_fragments = 0;  // <unfinished ...> halves folded into a resume
  uint64_t dropped_resumed = 0;   // resumed with no matching unfinished (and stale unfinished)
  uint64_t truncated_paths = 0;   // path argument cut short by strace -s
  uint64_t tagger_warnings = 0;   // unmatched block markers, force-closes
  uint64_t interp_errors = 0;     // unresolvable fds, unknown dupfd sources, ...

  static constexpr size_t kMaxNotes = 64;
  std::vector<std::string> notes;

  void note(std::string msg) {
    if (notes.size() < kMaxNotes) notes.push_back(std::move(msg));
  }

  uint64_t total() const {
    return skipped_lines + merged_fragments + dropped_resumed + truncated_paths +
           tagger_warnings + interp_errors;
  }
};

}  // namespace fsracer
