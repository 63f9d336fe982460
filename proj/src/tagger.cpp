#include "tagger.hpp"

#include <cstdlib>

#include "parser.hpp"

namespace fsracer {

namespace {

constexpr std::string_view kStart = ": Starting to evaluate the resource";
constexpr std::string_view kEnd = ": Evaluated in ";
constexpr size_t kKeepTail = 8192;

// The resource path sits between the last line start and the sentinel.
std::string_view resource_before(std::string_view buf, size_t sentinel_pos) {
  size_t line_start = buf.rfind('\n', sentinel_pos);
  line_start = line_start == std::string_view::npos ? 0 : line_start + 1;
  std::string_view head = buf.substr(line_start, sentinel_pos - line_start);
  constexpr std::string_view kInfo = "Info: ";
  size_t info = head.rfind(kInfo);
  if (info != std::string_view::npos) head = head.substr(info + kInfo.size());
  return head;
}

}  // namespace

std::string PuppetTagger::block_name(std::string_view resource_path) {
  int depth = 0;
  size_t start = 0;
  for (size_t i = 0; i < resource_path.size(); i++) {
    char c = resource_path[i];
    if (c == '[')
      depth++;
    else if (c == ']')
      depth--;
    else if (c == '/' && depth == 0)
      start = i + 1;
  }
  return std::string(resource_path.substr(start));
}

void PuppetTagger::open_block(std::string_view name) {
  if (!_current.is_bottom()) {
    _diag.tagger_warnings++;
    _diag.note("block " + _current.name + " implicitly closed by " + std::string(name));
  }
  _current = Block{std::string(name), ++_begin_events};
  if (_known_names.insert(_current.name).second) _names.push_back(_current.name);
}

void PuppetTagger::close_block(std::string_view name) {
  if (_current.is_bottom()) {
    _diag.tagger_warnings++;
    _diag.note("end marker without open block: " + std::string(name));
    return;
  }
  if (_current.name != name) {
    _diag.tagger_warnings++;
    _diag.note("end marker " + std::string(name) + " closes block " + _current.name);
  }
  _current = Block{};
}

void PuppetTagger::scan(std::string& buf) {
  for (;;) {
    size_t s = buf.find(kStart);
    size_t e = buf.find(kEnd);
    if (s == std::string::npos && e == std::string::npos) break;
    _marker_events++;
    if (s < e) {
      std::string name = block_name(resource_before(buf, s));
      if (name.empty()) {
        _diag.tagger_warnings++;
        _diag.note("start marker without resource path");
      } else {
        open_block(name);
      }
      buf.erase(0, s + kStart.size());
    } else {
      std::string name = block_name(resource_before(buf, e));
      close_block(name);
      buf.erase(0, e + kEnd.size());
    }
  }
  if (buf.size() > kKeepTail) buf.erase(0, buf.size() - kKeepTail);
}

Block PuppetTagger::tag(const TraceEntry& entry) {
  if (_root_pid < 0) _root_pid = entry.pid;
  if (entry.pid == _root_pid && entry.name == "write" && entry.args.size() >= 2) {
    char* end = nullptr;
    long fd = std::strtol(entry.args[0].c_str(), &end, 10);
    if (end != entry.args[0].c_str() && *end == '\0' && (fd == 1 || fd == 2)) {
      std::string& buf = _buffers[static_cast<int>(fd)];
      buf += decode_string_token(entry.args[1]);
      uint64_t before = _marker_events;
      scan(buf);
      // Marker writes delimit a block but belong to none.
      if (_marker_events != before) return Block{};
    }
  }
  return _current;
}

void PuppetTagger::finish() {
  if (_current.is_bottom()) return;
  _diag.note("block " + _current.name + " still open at end of trace");
  _current = Block{};
}

}  // namespace fsracer
