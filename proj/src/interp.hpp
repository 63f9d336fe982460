#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "diagnostics.hpp"
#include "sysop.hpp"
#include "tagger.hpp"
#include "trace.hpp"

namespace fsracer {

using INode = uint64_t;
constexpr INode kRootINode = 1;

struct EffItem {
  Effect effect;
  std::string block;
  bool operator==(const EffItem&) const = default;
};

// path -> effects in trace order, duplicates collapsed
using EffectMap = std::map<std::string, std::vector<EffItem>>;

struct InterpStats {
  uint64_t entries = 0;
  uint64_t effects = 0;
  uint64_t inodes = 1;
  uint64_t memo_hits = 0;
  uint64_t memo_misses = 0;
};

// Interprets constructs over the file-system abstraction: an inode table
// keyed by (parent inode, name), per-process fd and cwd tables behind
// address indirection (so clones can share them), a symlink table, and the
// per-path effect log.
class Interp {
 public:
  explicit Interp(Diagnostics& diag, const std::string& bootstrap_cwd = "/");

  void step(const TraceEntry& entry, const Block& block, const SysOp& op);

  const EffectMap& effects() const { return _effects; }
  const InterpStats& stats() const { return _stats; }
  std::string effects_json() const;

  // introspection used by tests
  std::optional<INode> lookup(const std::string& abs_path) const;
  std::optional<std::string> first_path_of(INode ino);
  std::optional<INode> cwd_inode(int64_t pid) const;
  std::optional<INode> fd_inode(int64_t pid, int64_t fd) const;
  std::optional<std::string> symlink_target(INode ino) const;
  bool knows_pid(int64_t pid) const { return _procs.count(pid) != 0; }
  uint64_t version() const { return _version; }
  std::optional<std::string> resolve(int64_t pid, const DirFd& d, const std::string& path);

 private:
  using Addr = uint64_t;
  struct ProcAddrs {
    Addr fd_addr;
    Addr cwd_addr;
  };
  struct Key {
    INode parent;
    std::string name;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      return std::hash<std::string>()(k.name) * 1099511628211ull + k.parent;
    }
  };

  ProcAddrs& ensure_proc(int64_t pid);
  void acquire(Addr addr);
  void release(Addr addr);  // drops the fd/cwd table once unreferenced
  INode mint();
  INode intern(const std::string& abs_path);  // lazy: missing names get inodes
  void bind(INode parent, const std::string& name, INode child);
  void unbind(INode parent, const std::string& name);
  void record(const std::string& path, Effect eff, const Block& block);
  void expunge_path(const std::string& path, const Block& block);
  std::string absolutize(const std::string& base_dir, const std::string& p);

  Diagnostics& _diag;
  InterpStats _stats;
  uint64_t _version = 0;
  INode _next_inode = kRootINode + 1;
  Addr _next_addr = 1;
  INode _bootstrap_cwd;

  std::unordered_map<Key, INode, KeyHash> _tree;                         // tau
  std::unordered_map<INode, std::vector<std::pair<INode, std::string>>> _rev;
  std::unordered_map<Addr, std::unordered_map<int64_t, INode>> _fds;    // pi
  std::unordered_map<Addr, INode> _cwds;                                 // phi
  std::unordered_map<int64_t, ProcAddrs> _procs;                         // nu
  std::unordered_map<Addr, uint32_t> _addr_refs;  // processes sharing an addr
  std::unordered_map<INode, std::string> _symlinks;                      // kappa
  EffectMap _effects;                                                    // rho

  std::unordered_map<std::string, std::pair<uint64_t, std::string>> _resolve_memo;
  std::unordered_map<INode, std::pair<uint64_t, std::string>> _path_memo;
};

}  // namespace fsracer
