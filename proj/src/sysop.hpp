#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "parser.hpp"

namespace fsracer {

enum class Effect : uint8_t { consumed, produced, expunged };

inline const char* effect_name(Effect e) {
  switch (e) {
    case Effect::consumed: return "consumed";
    case Effect::produced: return "produced";
    case Effect::expunged: return "expunged";
  }
  return "?";
}

// Directory anchor of a relative path: the caller's working directory or an
// open directory descriptor.
struct DirFd {
  bool at_cwd = true;
  int64_t fd = 0;

  static DirFd cwd() { return DirFd{}; }
  static DirFd of(int64_t fd) { return DirFd{false, fd}; }
  bool operator==(const DirFd&) const = default;
};

struct OpNop {};

struct OpChdir {
  DirFd dir;  // fchdir arrives as dir=fd, path="."
  std::string path;
};

struct OpClone {
  int64_t child = 0;
  bool share_fd = false;
  bool share_cwd = false;
};

struct OpClose {
  int64_t fd = 0;
};

struct OpDupFd {
  int64_t from = 0;
  int64_t to = 0;
};

// Path access with an effect; follow=false keeps a trailing symlink
// unresolved.
struct OpHpath {
  DirFd dir;
  std::string path;
  Effect effect = Effect::consumed;
  bool follow = true;
};

struct OpLink {
  DirFd dir1;
  std::string path1;
  DirFd dir2;
  std::string path2;
};

struct OpOpen {
  DirFd dir;
  std::string path;
  OpenFlagSet flags;
  int64_t fd = -1;  // taken from the return value
};

struct OpRename {
  DirFd dir1;
  std::string path1;
  DirFd dir2;
  std::string path2;
};

struct OpSymlink {
  std::string target;
  DirFd dir;
  std::string path;
};

using SysOp = std::variant<OpNop, OpChdir, OpClone, OpClose, OpDupFd, OpHpath,
                           OpLink, OpOpen, OpRename, OpSymlink>;

// produced only when the open itself rewrites or creates the file
inline Effect open_effect(OpenFlagSet flags) {
  bool rewrite = flags.has(OpenFlag::trunc) && flags.has(OpenFlag::write);
  if (rewrite || flags.has(OpenFlag::creat)) return Effect::produced;
  return Effect::consumed;
}

}  // namespace fsracer
