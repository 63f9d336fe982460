#pragma once

#include <string>
#include <string_view>

namespace fsracer {

// Textual path canonicalization: squeeze duplicate separators, drop "."
// segments, collapse ".." against the previous component. "/.." stays "/";
// a relative path keeps leading ".." segments it cannot collapse.
std::string normalize_path(std::string_view p);

// join("(/a", "b/c") == "/a/b/c"; an absolute rhs wins. Result is normalized.
std::string join_paths(std::string_view base, std::string_view rel);

// Parent directory of a normalized path. dir("/a/b") == "/a", dir("/a") == "/",
// dir("/") == "/", dir("a") == ".".
std::string dir_name(std::string_view p);

// Final component. base("/a/b") == "b", base("/") == "/".
std::string base_name(std::string_view p);

bool is_absolute(std::string_view p);

}  // namespace fsracer
