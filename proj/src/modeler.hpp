#pragma once

#include <map>
#include <optional>
#include <string>

#include "diagnostics.hpp"
#include "sysop.hpp"
#include "trace.hpp"

namespace fsracer {

// Table-driven shape for the common "syscall touches one path" family.
// Anything richer (open, clone, dup, rename, ...) has a coded handler.
struct PathRule {
  int dirfd_arg = -1;  // -1: path is anchored at the working directory
  int path_arg = 0;
  Effect effect = Effect::consumed;
  bool follow = true;
  int flags_arg = -1;  // arg that may carry AT_SYMLINK_NOFOLLOW, -1: none
};

class Modeler {
 public:
  explicit Modeler(Diagnostics& diag);

  // Maps one trace entry onto a construct. Unknown names map to OpNop.
  SysOp model(const TraceEntry& entry);

  // Merge path-rule overrides from a JSON object:
  //   {"statx": {"construct": "hpath", "dirfd_arg": 0, "path_arg": 1,
  //              "effect": "consumed", "flags_arg": 2},
  //    "getxattr": {"construct": "nop"}}
  // Only the single-path family and nop may be overridden this way.
  void load_rules(const std::string& json_text);

  const std::map<std::string, PathRule>& rules() const { return _rules; }

 private:
  std::optional<std::string> path_of(const TraceEntry& entry, size_t idx);
  DirFd dirfd_of(const TraceEntry& entry, size_t idx);

  Diagnostics& _diag;
  std::map<std::string, PathRule> _rules;
};

}  // namespace fsracer
