#include "interp.hpp"

#include <algorithm>

#include <json.hpp>

#include "path_util.hpp"

namespace fsracer {

namespace {
constexpr size_t kResolveMemoCap = 1 << 18;
constexpr const char* kBottomLabel = "⊥";
}  // namespace

Interp::Interp(Diagnostics& diag, const std::string& bootstrap_cwd) : _diag(diag) {
  std::string cwd = normalize_path(bootstrap_cwd);
  if (!is_absolute(cwd)) cwd = "/" + cwd;
  _bootstrap_cwd = intern(cwd);
}

Interp::ProcAddrs& Interp::ensure_proc(int64_t pid) {
  auto it = _procs.find(pid);
  if (it != _procs.end()) return it->second;
  // Processes may surface mid-trace (attach races, clone seen by the child
  // first); they start with an empty fd table at the bootstrap directory.
  ProcAddrs pa{_next_addr++, _next_addr++};
  _fds[pa.fd_addr];
  _cwds[pa.cwd_addr] = _bootstrap_cwd;
  acquire(pa.fd_addr);
  acquire(pa.cwd_addr);
  _version++;
  return _procs.emplace(pid, pa).first->second;
}

void Interp::acquire(Addr addr) { _addr_refs[addr]++; }

void Interp::release(Addr addr) {
  auto it = _addr_refs.find(addr);
  if (it == _addr_refs.end() || --it->second > 0) return;
  _addr_refs.erase(it);
  _fds.erase(addr);
  _cwds.erase(addr);
}

INode Interp::mint() {
  _stats.inodes++;
  return _next_inode++;
}

void Interp::bind(INode parent, const std::string& name, INode child) {
  auto it = _tree.find(Key{parent, name});
  if (it != _tree.end()) {
    if (it->second == child) return;
    unbind(parent, name);  // drop the reverse link of the replaced child
  }
  _tree[Key{parent, name}] = child;
  _rev[child].emplace_back(parent, name);
  _version++;
}

void Interp::unbind(INode parent, const std::string& name) {
  auto it = _tree.find(Key{parent, name});
  if (it == _tree.end()) return;
  INode child = it->second;
  _tree.erase(it);
  auto rev = _rev.find(child);
  if (rev != _rev.end()) {
    auto& links = rev->second;
    links.erase(std::remove(links.begin(), links.end(), std::make_pair(parent, name)),
                links.end());
    if (links.empty()) _rev.erase(rev);
  }
  _version++;
}

INode Interp::intern(const std::string& abs_path) {
  INode cur = kRootINode;
  size_t i = 1;  // abs_path is normalized and starts with '/'
  while (i < abs_path.size()) {
    size_t j = abs_path.find('/', i);
    if (j == std::string::npos) j = abs_path.size();
    std::string name = abs_path.substr(i, j - i);
    auto it = _tree.find(Key{cur, name});
    if (it != _tree.end()) {
      cur = it->second;
    } else {
      INode fresh = mint();
      bind(cur, name, fresh);
      cur = fresh;
    }
    i = j + 1;
  }
  return cur;
}

std::optional<INode> Interp::lookup(const std::string& abs_path) const {
  INode cur = kRootINode;
  std::string norm = normalize_path(abs_path);
  size_t i = 1;
  while (i < norm.size()) {
    size_t j = norm.find('/', i);
    if (j == std::string::npos) j = norm.size();
    auto it = _tree.find(Key{cur, norm.substr(i, j - i)});
    if (it == _tree.end()) return std::nullopt;
    cur = it->second;
    i = j + 1;
  }
  return cur;
}

std::optional<std::string> Interp::first_path_of(INode ino) {
  if (ino == kRootINode) return std::string("/");
  auto memo = _path_memo.find(ino);
  if (memo != _path_memo.end() && memo->second.first == _version) return memo->second.second;

  // first-inserted live link, walking up to the root
  std::vector<std::string_view> parts;
  INode cur = ino;
  for (int depth = 0; cur != kRootINode; depth++) {
    if (depth > 4096) return std::nullopt;  // link cycle in the name tree
    auto it = _rev.find(cur);
    if (it == _rev.end() || it->second.empty()) return std::nullopt;
    parts.push_back(it->second.front().second);
    cur = it->second.front().first;
  }
  std::string out;
  for (auto p = parts.rbegin(); p != parts.rend(); ++p) {
    out += '/';
    out += *p;
  }
  if (out.empty()) out = "/";
  _path_memo[ino] = {_version, out};
  return out;
}

std::optional<INode> Interp::cwd_inode(int64_t pid) const {
  auto it = _procs.find(pid);
  if (it == _procs.end()) return std::nullopt;
  auto c = _cwds.find(it->second.cwd_addr);
  if (c == _cwds.end()) return std::nullopt;
  return c->second;
}

std::optional<INode> Interp::fd_inode(int64_t pid, int64_t fd) const {
  auto it = _procs.find(pid);
  if (it == _procs.end()) return std::nullopt;
  auto t = _fds.find(it->second.fd_addr);
  if (t == _fds.end()) return std::nullopt;
  auto f = t->second.find(fd);
  if (f == t->second.end()) return std::nullopt;
  return f->second;
}

std::optional<std::string> Interp::symlink_target(INode ino) const {
  auto it = _symlinks.find(ino);
  if (it == _symlinks.end()) return std::nullopt;
  return it->second;
}

std::string Interp::absolutize(const std::string& base_dir, const std::string& p) {
  if (is_absolute(p)) return normalize_path(p);
  return join_paths(base_dir, p);
}

std::optional<std::string> Interp::resolve(int64_t pid, const DirFd& d, const std::string& path) {
  if (is_absolute(path)) return normalize_path(path);
  ProcAddrs& pa = ensure_proc(pid);

  std::string key;
  key.reserve(path.size() + 24);
  key += std::to_string(d.at_cwd ? pa.cwd_addr : pa.fd_addr);
  key += d.at_cwd ? "|c|" : "|" + std::to_string(d.fd) + "|";
  key += path;
  auto memo = _resolve_memo.find(key);
  if (memo != _resolve_memo.end() && memo->second.first == _version) {
    _stats.memo_hits++;
    return memo->second.second;
  }
  _stats.memo_misses++;

  std::optional<std::string> base;
  if (d.at_cwd) {
    auto c = _cwds.find(pa.cwd_addr);
    if (c != _cwds.end()) base = first_path_of(c->second);
  } else {
    auto t = _fds.find(pa.fd_addr);
    if (t != _fds.end()) {
      auto f = t->second.find(d.fd);
      if (f != t->second.end()) base = first_path_of(f->second);
    }
  }
  if (!base) return std::nullopt;
  std::string out = join_paths(*base, path);
  if (_resolve_memo.size() >= kResolveMemoCap) _resolve_memo.clear();
  _resolve_memo[std::move(key)] = {_version, out};
  return out;
}

void Interp::record(const std::string& path, Effect eff, const Block& block) {
  auto& items = _effects[path];
  EffItem item{eff, block.name};
  if (std::find(items.begin(), items.end(), item) != items.end()) return;
  items.push_back(std::move(item));
  _stats.effects++;
}

void Interp::expunge_path(const std::string& path, const Block& block) {
  auto& items = _effects[path];
  items.erase(std::remove_if(items.begin(), items.end(),
                             [&](const EffItem& it) { return it.block == block.name; }),
              items.end());
  items.push_back(EffItem{Effect::expunged, block.name});
  _stats.effects++;
}

void Interp::step(const TraceEntry& entry, const Block& block, const SysOp& op) {
  _stats.entries++;
  const bool ok = entry.retval.ok();
  const int64_t pid = entry.pid;
  ensure_proc(pid);

  auto fail = [&](const std::string& what) {
    _diag.interp_errors++;
    _diag.note(what + " (line " + std::to_string(entry.line_no) + ")");
  };

  if (std::holds_alternative<OpNop>(op)) return;

  if (const auto* o = std::get_if<OpChdir>(&op)) {
    if (!ok) return;  // the working directory did not change
    auto abs = resolve(pid, o->dir, o->path);
    if (!abs) return fail("chdir: unresolvable path");
    _cwds[_procs[pid].cwd_addr] = intern(*abs);
    _version++;
    return;
  }

  if (const auto* o = std::get_if<OpClone>(&op)) {
    ProcAddrs parent = _procs[pid];
    ProcAddrs child;
    if (o->share_fd) {
      child.fd_addr = parent.fd_addr;
    } else {
      child.fd_addr = _next_addr++;
      _fds[child.fd_addr] = _fds[parent.fd_addr];
    }
    if (o->share_cwd) {
      child.cwd_addr = parent.cwd_addr;
    } else {
      child.cwd_addr = _next_addr++;
      _cwds[child.cwd_addr] = _cwds[parent.cwd_addr];
    }
    acquire(child.fd_addr);
    acquire(child.cwd_addr);
    // A reused pid means the earlier holder is gone; its tables go with it
    // unless a sibling still shares them.
    auto prev = _procs.find(o->child);
    if (prev != _procs.end()) {
      release(prev->second.fd_addr);
      release(prev->second.cwd_addr);
    }
    _procs[o->child] = child;
    _version++;
    return;
  }

  if (const auto* o = std::get_if<OpClose>(&op)) {
    if (!ok) return;
    auto& table = _fds[_procs[pid].fd_addr];
    if (table.erase(o->fd)) _version++;
    return;
  }

  if (const auto* o = std::get_if<OpDupFd>(&op)) {
    if (!ok) return;
    auto& table = _fds[_procs[pid].fd_addr];
    auto from = table.find(o->from);
    if (from == table.end()) return;  // pathless descriptor (socket, pipe)
    table[o->to] = from->second;
    _version++;
    return;
  }

  if (const auto* o = std::get_if<OpHpath>(&op)) {
    auto abs = resolve(pid, o->dir, o->path);
    if (!abs) return fail(entry.name + ": unresolvable path");
    switch (o->effect) {
      case Effect::consumed:
      case Effect::produced: {
        std::string target = *abs;
        if (o->follow) {
          auto link = _symlinks.find(intern(*abs));
          if (link != _symlinks.end()) target = link->second;
        }
        if (o->effect == Effect::consumed)
          record(target, Effect::consumed, block);
        else if (ok)
          record(target, Effect::produced, block);
        break;
      }
      case Effect::expunged:
        // expunge always names the path itself, never a symlink target
        if (!ok) break;
        expunge_path(*abs, block);
        unbind(intern(dir_name(*abs)), base_name(*abs));
        break;
    }
    return;
  }

  if (const auto* o = std::get_if<OpOpen>(&op)) {
    auto abs = resolve(pid, o->dir, o->path);
    if (!abs) return fail("open: unresolvable path");
    Effect eff = open_effect(o->flags);
    if (eff == Effect::consumed)
      record(*abs, Effect::consumed, block);
    else if (ok)
      record(*abs, Effect::produced, block);
    if (ok && o->fd >= 0) {
      _fds[_procs[pid].fd_addr][o->fd] = intern(*abs);
      _version++;
    }
    return;
  }

  if (const auto* o = std::get_if<OpLink>(&op)) {
    if (!ok) return;
    auto abs1 = resolve(pid, o->dir1, o->path1);
    auto abs2 = resolve(pid, o->dir2, o->path2);
    if (!abs1 || !abs2) return fail("link: unresolvable path");
    INode target = intern(*abs1);
    bind(intern(dir_name(*abs2)), base_name(*abs2), target);
    record(*abs2, Effect::produced, block);
    return;
  }

  if (const auto* o = std::get_if<OpRename>(&op)) {
    if (!ok) return;
    auto abs1 = resolve(pid, o->dir1, o->path1);
    auto abs2 = resolve(pid, o->dir2, o->path2);
    if (!abs1 || !abs2) return fail("rename: unresolvable path");
    if (*abs1 == *abs2) return;
    INode moved = intern(*abs1);
    bind(intern(dir_name(*abs2)), base_name(*abs2), moved);
    unbind(intern(dir_name(*abs1)), base_name(*abs1));
    expunge_path(*abs1, block);
    record(*abs2, Effect::produced, block);
    return;
  }

  if (const auto* o = std::get_if<OpSymlink>(&op)) {
    if (!ok) return;
    auto abs2 = resolve(pid, o->dir, o->path);
    if (!abs2) return fail("symlink: unresolvable path");
    INode fresh = mint();
    bind(intern(dir_name(*abs2)), base_name(*abs2), fresh);
    // keep the stored target absolute so effect keys stay comparable
    _symlinks[fresh] = absolutize(dir_name(*abs2), o->target);
    record(*abs2, Effect::produced, block);
    return;
  }
}

std::string Interp::effects_json() const {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [path, items] : _effects) {
    nlohmann::json arr = nlohmann::json::array();
    for (const EffItem& it : items) {
      arr.push_back({{"effect", effect_name(it.effect)},
                     {"block", it.block.empty() ? kBottomLabel : it.block}});
    }
    doc[path] = std::move(arr);
  }
  return doc.dump(2);
}

}  // namespace fsracer
