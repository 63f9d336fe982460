#include "modeler.hpp"

#include <cstdlib>
#include <set>

#include <json.hpp>

namespace fsracer {

namespace {

std::map<std::string, PathRule> default_rules() {
  constexpr auto C = Effect::consumed;
  constexpr auto P = Effect::produced;
  constexpr auto E = Effect::expunged;
  std::map<std::string, PathRule> r;
  // plain-path, cwd-anchored, consumed (metadata reads and writes alike;
  // only calls that replace content count as produced)
  r["access"] = {-1, 0, C, true, -1};
  r["stat"] = {-1, 0, C, true, -1};
  r["stat64"] = {-1, 0, C, true, -1};
  r["statfs"] = {-1, 0, C, true, -1};
  r["getxattr"] = {-1, 0, C, true, -1};
  r["listxattr"] = {-1, 0, C, true, -1};
  r["setxattr"] = {-1, 0, C, true, -1};
  r["removexattr"] = {-1, 0, C, true, -1};
  r["readlink"] = {-1, 0, C, true, -1};
  r["utime"] = {-1, 0, C, true, -1};
  r["utimes"] = {-1, 0, C, true, -1};
  r["chmod"] = {-1, 0, C, true, -1};
  r["chown"] = {-1, 0, C, true, -1};
  r["truncate"] = {-1, 0, P, true, -1};
  r["mkdir"] = {-1, 0, P, true, -1};
  r["mknod"] = {-1, 0, P, true, -1};
  r["unlink"] = {-1, 0, E, true, -1};
  r["rmdir"] = {-1, 0, E, true, -1};
  // plain-path, trailing symlink kept
  r["lstat"] = {-1, 0, C, false, -1};
  r["lstat64"] = {-1, 0, C, false, -1};
  r["lgetxattr"] = {-1, 0, C, false, -1};
  r["llistxattr"] = {-1, 0, C, false, -1};
  r["lchown"] = {-1, 0, C, false, -1};
  r["lsetxattr"] = {-1, 0, C, false, -1};
  r["lremovexattr"] = {-1, 0, C, false, -1};
  // dirfd-anchored extensions of the same families
  r["faccessat"] = {0, 1, C, true, 3};
  r["faccessat2"] = {0, 1, C, true, 3};
  r["newfstatat"] = {0, 1, C, true, 3};
  r["fstatat64"] = {0, 1, C, true, 3};
  r["statx"] = {0, 1, C, true, 2};
  r["readlinkat"] = {0, 1, C, true, -1};
  r["name_to_handle_at"] = {0, 1, C, true, 4};
  r["utimensat"] = {0, 1, C, true, 3};
  r["futimesat"] = {0, 1, C, true, -1};
  r["fchmodat"] = {0, 1, C, true, 3};
  r["fchownat"] = {0, 1, C, true, 4};
  r["mkdirat"] = {0, 1, P, true, -1};
  r["mknodat"] = {0, 1, P, true, -1};
  r["unlinkat"] = {0, 1, E, true, -1};
  return r;
}

bool is_ident(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

bool has_flag(const std::string& token, std::string_view flag) {
  size_t pos = 0;
  while ((pos = token.find(flag, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !is_ident(token[pos - 1]);
    size_t end = pos + flag.size();
    bool right_ok = end >= token.size() || !is_ident(token[end]);
    if (left_ok && right_ok) return true;
    pos = end;
  }
  return false;
}

int64_t int_arg(const TraceEntry& e, size_t idx, bool* ok) {
  *ok = false;
  if (idx >= e.args.size()) return 0;
  const std::string& t = e.args[idx];
  char* end = nullptr;
  long long v = std::strtoll(t.c_str(), &end, 0);
  if (end == t.c_str()) return 0;
  *ok = true;
  return v;
}

}  // namespace

Modeler::Modeler(Diagnostics& diag) : _diag(diag), _rules(default_rules()) {}

std::optional<std::string> Modeler::path_of(const TraceEntry& entry, size_t idx) {
  if (idx >= entry.args.size()) return std::nullopt;
  const std::string& tok = entry.args[idx];
  if (tok.empty() || tok.front() != '"') return std::nullopt;
  bool truncated = false;
  std::string p = decode_string_token(tok, &truncated);
  if (truncated) {
    _diag.truncated_paths++;
    _diag.note("truncated path argument in " + entry.name + " (line " +
               std::to_string(entry.line_no) + ")");
    return std::nullopt;
  }
  return p;
}

DirFd Modeler::dirfd_of(const TraceEntry& entry, size_t idx) {
  if (idx >= entry.args.size()) return DirFd::cwd();
  const std::string& tok = entry.args[idx];
  if (tok == "AT_FDCWD") return DirFd::cwd();
  char* end = nullptr;
  long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str()) return DirFd::cwd();
  return DirFd::of(v);
}

SysOp Modeler::model(const TraceEntry& e) {
  const std::string& n = e.name;

  auto it = _rules.find(n);
  if (it != _rules.end()) {
    const PathRule& r = it->second;
    auto p = path_of(e, static_cast<size_t>(r.path_arg));
    if (!p) return OpNop{};
    DirFd d = r.dirfd_arg < 0 ? DirFd::cwd() : dirfd_of(e, static_cast<size_t>(r.dirfd_arg));
    bool follow = r.follow;
    if (r.flags_arg >= 0 && static_cast<size_t>(r.flags_arg) < e.args.size() &&
        has_flag(e.args[static_cast<size_t>(r.flags_arg)], "AT_SYMLINK_NOFOLLOW"))
      follow = false;
    return OpHpath{d, std::move(*p), r.effect, follow};
  }

  if (n == "open" || n == "openat" || n == "creat") {
    size_t base = n == "openat" ? 1 : 0;
    auto p = path_of(e, base);
    if (!p) return OpNop{};
    DirFd d = n == "openat" ? dirfd_of(e, 0) : DirFd::cwd();
    OpenFlagSet flags;
    if (n == "creat") {
      flags.set(OpenFlag::write);
      flags.set(OpenFlag::creat);
      flags.set(OpenFlag::trunc);
    } else if (base + 1 < e.args.size()) {
      flags = parse_open_flags(e.args[base + 1], &_diag);
    } else {
      flags.set(OpenFlag::read);
    }
    return OpOpen{d, std::move(*p), flags, e.retval.ok() ? e.retval.value : -1};
  }

  if (n == "close") {
    bool ok = false;
    int64_t fd = int_arg(e, 0, &ok);
    if (!ok) return OpNop{};
    return OpClose{fd};
  }

  if (n == "dup" || n == "dup2" || n == "dup3") {
    bool ok = false;
    int64_t from = int_arg(e, 0, &ok);
    if (!ok) return OpNop{};
    int64_t to;
    if (n == "dup") {
      if (!e.retval.ok()) return OpNop{};
      to = e.retval.value;
    } else {
      to = int_arg(e, 1, &ok);
      if (!ok) return OpNop{};
    }
    return OpDupFd{from, to};
  }

  if (n == "fcntl" || n == "fcntl64") {
    if (e.args.size() < 2) return OpNop{};
    const std::string& cmd = e.args[1];
    if (cmd != "F_DUPFD" && cmd != "F_DUPFD_CLOEXEC") return OpNop{};
    bool ok = false;
    int64_t from = int_arg(e, 0, &ok);
    if (!ok || !e.retval.ok()) return OpNop{};
    return OpDupFd{from, e.retval.value};
  }

  if (n == "chdir") {
    auto p = path_of(e, 0);
    if (!p) return OpNop{};
    return OpChdir{DirFd::cwd(), std::move(*p)};
  }
  if (n == "fchdir") {
    bool ok = false;
    int64_t fd = int_arg(e, 0, &ok);
    if (!ok) return OpNop{};
    return OpChdir{DirFd::of(fd), "."};
  }

  if (n == "fork" || n == "vfork" || n == "clone" || n == "clone3") {
    if (!e.retval.ok() || e.retval.value <= 0) return OpNop{};
    bool share_fd = false;
    bool share_cwd = false;
    for (const std::string& a : e.args) {
      if (has_flag(a, "CLONE_FILES")) share_fd = true;
      if (has_flag(a, "CLONE_FS")) share_cwd = true;
    }
    return OpClone{e.retval.value, share_fd, share_cwd};
  }

  if (n == "link" || n == "linkat") {
    size_t off = n == "linkat" ? 1 : 0;
    auto p1 = path_of(e, off);
    auto p2 = path_of(e, off * 2 + 1);
    if (!p1 || !p2) return OpNop{};
    DirFd d1 = off ? dirfd_of(e, 0) : DirFd::cwd();
    DirFd d2 = off ? dirfd_of(e, 2) : DirFd::cwd();
    return OpLink{d1, std::move(*p1), d2, std::move(*p2)};
  }

  if (n == "rename" || n == "renameat" || n == "renameat2") {
    size_t off = n == "rename" ? 0 : 1;
    auto p1 = path_of(e, off);
    auto p2 = path_of(e, off * 2 + 1);
    if (!p1 || !p2) return OpNop{};
    DirFd d1 = off ? dirfd_of(e, 0) : DirFd::cwd();
    DirFd d2 = off ? dirfd_of(e, 2) : DirFd::cwd();
    return OpRename{d1, std::move(*p1), d2, std::move(*p2)};
  }

  if (n == "symlink" || n == "symlinkat") {
    auto target = path_of(e, 0);
    size_t link_idx = n == "symlinkat" ? 2 : 1;
    auto lp = path_of(e, link_idx);
    if (!target || !lp) return OpNop{};
    DirFd d = n == "symlinkat" ? dirfd_of(e, 1) : DirFd::cwd();
    return OpSymlink{std::move(*target), d, std::move(*lp)};
  }

  return OpNop{};
}

void Modeler::load_rules(const std::string& json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text);
  if (!doc.is_object()) throw std::runtime_error("rule file: object expected");
  static const std::set<std::string> kCoded = {
      "open",   "openat", "creat",  "close",    "dup",      "dup2",
      "dup3",   "fcntl",  "fcntl64", "chdir",   "fchdir",   "fork",
      "vfork",  "clone",  "clone3", "link",     "linkat",   "rename",
      "renameat", "renameat2", "symlink", "symlinkat"};
  for (auto& [name, spec] : doc.items()) {
    if (!spec.is_object()) throw std::runtime_error("rule " + name + ": object expected");
    if (kCoded.count(name))
      throw std::runtime_error("rule " + name + ": coded handlers cannot be overridden");
    std::string construct = spec.value("construct", "");
    if (construct == "nop") {
      _rules.erase(name);
      continue;
    }
    if (construct != "hpath" && construct != "hpathsym")
      throw std::runtime_error("rule " + name + ": construct must be hpath, hpathsym or nop");
    PathRule r;
    r.dirfd_arg = spec.value("dirfd_arg", -1);
    r.path_arg = spec.value("path_arg", 0);
    r.flags_arg = spec.value("flags_arg", -1);
    r.follow = construct == "hpath";
    std::string eff = spec.value("effect", "consumed");
    if (eff == "consumed")
      r.effect = Effect::consumed;
    else if (eff == "produced")
      r.effect = Effect::produced;
    else if (eff == "expunged")
      r.effect = Effect::expunged;
    else
      throw std::runtime_error("rule " + name + ": unknown effect " + eff);
    _rules[name] = r;
  }
}

}  // namespace fsracer
