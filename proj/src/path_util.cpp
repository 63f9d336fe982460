#include "path_util.hpp"

#include <vector>

namespace fsracer {

bool is_absolute(std::string_view p) {
  return !p.empty() && p.front() == '/';
}

std::string normalize_path(std::string_view p) {
  if (p.empty()) return std::string(p);
  const bool abs = p.front() == '/';

  // Fast path: already canonical, return as-is.
  bool clean = true;
  for (size_t i = 0; i + 1 < p.size() && clean; i++) {
    if (p[i] != '/') continue;
    if (p[i + 1] == '/') clean = false;
    if (p[i + 1] == '.') clean = false;
  }
  if (clean && p[0] == '.') clean = false;
  if (clean && p.size() > 1 && p.back() == '/') clean = false;
  if (clean) return std::string(p);

  std::vector<std::string_view> out;
  size_t kept_dotdots = 0;
  size_t i = 0;
  while (i < p.size()) {
    while (i < p.size() && p[i] == '/') i++;
    size_t start = i;
    while (i < p.size() && p[i] != '/') i++;
    std::string_view seg = p.substr(start, i - start);
    if (seg.empty() || seg == ".") continue;
    if (seg == "..") {
      if (out.size() > kept_dotdots) {
        out.pop_back();
      } else if (!abs) {
        out.push_back(seg);  // cannot collapse past a relative start
        kept_dotdots++;
      }
      // absolute: ".." at root is dropped
      continue;
    }
    out.push_back(seg);
  }

  std::string result;
  if (abs) result = "/";
  for (size_t k = 0; k < out.size(); k++) {
    if (k > 0) result += '/';
    result += out[k];
  }
  if (result.empty()) result = abs ? "/" : ".";
  return result;
}

std::string join_paths(std::string_view base, std::string_view rel) {
  if (rel.empty()) return normalize_path(base);
  if (is_absolute(rel)) return normalize_path(rel);
  std::string joined;
  joined.reserve(base.size() + rel.size() + 1);
  joined.append(base);
  joined += '/';
  joined.append(rel);
  return normalize_path(joined);
}

std::string dir_name(std::string_view p) {
  if (p == "/") return "/";
  size_t pos = p.rfind('/');
  if (pos == std::string_view::npos) return ".";
  if (pos == 0) return "/";
  return std::string(p.substr(0, pos));
}

std::string base_name(std::string_view p) {
  if (p == "/") return "/";
  size_t pos = p.rfind('/');
  if (pos == std::string_view::npos) return std::string(p);
  return std::string(p.substr(pos + 1));
}

}  // namespace fsracer
