#include "parser.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>

namespace fsracer {

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Strip an strace -y style decoration: "3</var/log>" -> "3",
// "AT_FDCWD</root>" -> "AT_FDCWD".
std::string_view strip_decoration(std::string_view tok) {
  size_t lt = tok.find('<');
  if (lt == std::string_view::npos || lt == 0 || tok.back() != '>') return tok;
  std::string_view head = tok.substr(0, lt);
  bool numeric = true;
  for (size_t i = 0; i < head.size(); i++) {
    if (!std::isdigit(static_cast<unsigned char>(head[i])) && !(i == 0 && head[i] == '-'))
      numeric = false;
  }
  if (numeric || head == "AT_FDCWD") return head;
  return tok;
}

// Scan one argument region. Returns the index just past the top-level ')'
// that closes the argument list opened before `pos`, or npos.
size_t find_args_end(std::string_view s, size_t pos) {
  int depth = 1;
  bool quote = false;
  bool esc = false;
  for (size_t i = pos; i < s.size(); i++) {
    char c = s[i];
    if (quote) {
      if (esc)
        esc = false;
      else if (c == '\\')
        esc = true;
      else if (c == '"')
        quote = false;
      continue;
    }
    switch (c) {
      case '"':
        quote = true;
        break;
      case '(':
      case '[':
      case '{':
        depth++;
        break;
      case ']':
      case '}':
        depth--;
        break;
      case ')':
        depth--;
        if (depth == 0) return i;
        break;
      case '<': {
        // fd decoration or address annotation; skip to its '>'
        size_t gt = s.find('>', i);
        if (gt == std::string_view::npos) return std::string_view::npos;
        i = gt;
        break;
      }
      default:
        break;
    }
  }
  return std::string_view::npos;
}

void split_args(std::string_view text, std::vector<std::string>* out) {
  text = trim(text);
  if (text.empty()) return;
  int depth = 0;
  bool quote = false;
  bool esc = false;
  size_t start = 0;
  auto push = [&](size_t end) {
    std::string_view tok = trim(text.substr(start, end - start));
    if (!tok.empty()) out->emplace_back(strip_decoration(tok));
  };
  for (size_t i = 0; i < text.size(); i++) {
    char c = text[i];
    if (quote) {
      if (esc)
        esc = false;
      else if (c == '\\')
        esc = true;
      else if (c == '"')
        quote = false;
      continue;
    }
    switch (c) {
      case '"':
        quote = true;
        break;
      case '(':
      case '[':
      case '{':
        depth++;
        break;
      case ')':
      case ']':
      case '}':
        depth--;
        break;
      case '<': {
        size_t gt = text.find('>', i);
        if (gt == std::string_view::npos) break;
        i = gt;
        break;
      }
      case ',':
        if (depth == 0) {
          push(i);
          start = i + 1;
        }
        break;
      default:
        break;
    }
  }
  push(text.size());
}

bool parse_retval(std::string_view text, Retval* rv) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '?') {
    rv->known = false;
    rv->value = 0;
    return true;
  }
  const char* begin = text.data();
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(begin, &end, 0);
  if (end == begin) return false;
  rv->value = v;
  rv->known = true;
  std::string_view rest = trim(text.substr(static_cast<size_t>(end - begin)));
  if (!rest.empty() && rest.front() == '<') {
    // -y decoration on the returned fd; ignore
    size_t gt = rest.find('>');
    rest = gt == std::string_view::npos ? std::string_view{} : trim(rest.substr(gt + 1));
  }
  if (!rest.empty() && rest.front() >= 'A' && rest.front() <= 'Z') {
    size_t i = 0;
    while (i < rest.size() && (std::isupper(static_cast<unsigned char>(rest[i])) ||
                               std::isdigit(static_cast<unsigned char>(rest[i])) || rest[i] == '_'))
      i++;
    if (i >= 2) rv->err = std::string(rest.substr(0, i));
  }
  return true;
}

// Strips a pid prefix ("103   " or "[pid 103] ") and an optional timestamp.
// Returns the remaining text; pid stays untouched when absent.
std::string_view strip_prefix(std::string_view s, int64_t* pid) {
  s = trim(s);
  if (s.rfind("[pid", 0) == 0) {
    size_t close = s.find(']');
    if (close != std::string_view::npos) {
      std::string_view num = trim(s.substr(4, close - 4));
      int64_t v = 0;
      for (char c : num) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return s;
        v = v * 10 + (c - '0');
      }
      if (v > 0) *pid = v;
      s = trim(s.substr(close + 1));
    }
  } else if (!s.empty() && std::isdigit(static_cast<unsigned char>(s.front()))) {
    size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) i++;
    // A dot marks an epoch timestamp, a colon a wall-clock one; both lack the
    // whitespace a pid column has only when followed by more digits.
    if (i < s.size() && (s[i] == ' ' || s[i] == '\t')) {
      int64_t v = 0;
      for (size_t k = 0; k < i; k++) v = v * 10 + (s[k] - '0');
      if (v > 0) *pid = v;
      s = trim(s.substr(i));
    }
  }
  // optional timestamp token: 12:34:56[.frac] or 1550000000.123456
  if (!s.empty() && std::isdigit(static_cast<unsigned char>(s.front()))) {
    size_t i = 0;
    bool time_like = false;
    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == ':' || s[i] == '.')) {
      if (s[i] == ':' || s[i] == '.') time_like = true;
      i++;
    }
    if (time_like && i < s.size() && (s[i] == ' ' || s[i] == '\t')) s = trim(s.substr(i));
  }
  return s;
}

}  // namespace

OpenFlagSet parse_open_flags(std::string_view token, Diagnostics* diag) {
  OpenFlagSet out;
  bool mode_seen = false;
  size_t start = 0;
  while (start <= token.size()) {
    size_t bar = token.find('|', start);
    std::string_view f =
        trim(token.substr(start, bar == std::string_view::npos ? token.size() - start : bar - start));
    if (f == "O_RDONLY") {
      out.set(OpenFlag::read);
      mode_seen = true;
    } else if (f == "O_WRONLY") {
      out.set(OpenFlag::write);
      mode_seen = true;
    } else if (f == "O_RDWR") {
      out.set(OpenFlag::read);
      out.set(OpenFlag::write);
      mode_seen = true;
    } else if (f == "O_TRUNC") {
      out.set(OpenFlag::trunc);
    } else if (f == "O_CREAT") {
      out.set(OpenFlag::creat);
    }
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  if (!mode_seen && !out.has(OpenFlag::read) && !out.has(OpenFlag::write)) {
    out.set(OpenFlag::read);
    if (diag) {
      diag->interp_errors++;
      diag->note("open flags without access mode: " + std::string(token));
    }
  }
  return out;
}

bool token_is_truncated_string(std::string_view token) {
  return token.size() >= 5 && token.front() == '"' && token.substr(token.size() - 4) == "\"...";
}

std::string decode_string_token(std::string_view token, bool* truncated) {
  if (truncated) *truncated = false;
  std::string_view body = token;
  if (token_is_truncated_string(body)) {
    if (truncated) *truncated = true;
    body = body.substr(0, body.size() - 3);
  }
  if (body.size() < 2 || body.front() != '"' || body.back() != '"') return std::string(body);
  body = body.substr(1, body.size() - 2);
  std::string out;
  out.reserve(body.size());
  for (size_t i = 0; i < body.size(); i++) {
    char c = body[i];
    if (c != '\\' || i + 1 >= body.size()) {
      out += c;
      continue;
    }
    char e = body[++i];
    switch (e) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case 'f': out += '\f'; break;
      case 'v': out += '\v'; break;
      case 'a': out += '\a'; break;
      case 'b': out += '\b'; break;
      case '0': case '1': case '2': case '3':
      case '4': case '5': case '6': case '7': {
        int v = e - '0';
        for (int k = 0; k < 2 && i + 1 < body.size() && body[i + 1] >= '0' && body[i + 1] <= '7'; k++)
          v = v * 8 + (body[++i] - '0');
        out += static_cast<char>(v);
        break;
      }
      case 'x': {
        int v = 0;
        int digits = 0;
        while (digits < 2 && i + 1 < body.size() &&
               std::isxdigit(static_cast<unsigned char>(body[i + 1]))) {
          char h = body[++i];
          v = v * 16 + (std::isdigit(static_cast<unsigned char>(h)) ? h - '0'
                                                                    : (std::tolower(h) - 'a' + 10));
          digits++;
        }
        out += static_cast<char>(v);
        break;
      }
      default:
        out += e;
        break;
    }
  }
  return out;
}

TraceParser::TraceParser(std::istream& in, Diagnostics& diag, NameFilter want_args)
    : _in(in), _diag(diag), _want_args(std::move(want_args)) {}

std::optional<TraceEntry> TraceParser::next() {
  TraceEntry entry;
  while (std::getline(_in, _line)) {
    _line_no++;
    _bytes += _line.size() + 1;
    if (parse_line(&entry)) {
      _entries++;
      return entry;
    }
  }
  // Unfinished calls whose resume never arrived.
  if (!_pending.empty()) {
    _diag.dropped_resumed += _pending.size();
    _diag.note("unfinished calls without a resume at end of trace");
    _pending.clear();
  }
  return std::nullopt;
}

bool TraceParser::parse_line(TraceEntry* out) {
  int64_t pid = 1;
  std::string_view rest = strip_prefix(_line, &pid);

  auto skip = [&](bool valid_form) {
    _diag.skipped_lines++;
    if (valid_form) _saw_valid_line = true;
  };

  if (rest.empty() || rest.rfind("strace:", 0) == 0) {
    skip(false);
    return false;
  }
  if (rest.rfind("---", 0) == 0 || rest.rfind("+++", 0) == 0) {
    skip(true);  // signal delivery / process exit marker
    return false;
  }

  // Resumed half: "<... name resumed> rest) = retval"
  if (rest.rfind("<...", 0) == 0) {
    size_t name_start = 4;
    while (name_start < rest.size() && rest[name_start] == ' ') name_start++;
    size_t name_end = name_start;
    while (name_end < rest.size() && is_ident_char(rest[name_end])) name_end++;
    std::string name(rest.substr(name_start, name_end - name_start));
    size_t gt = rest.find("resumed>", name_end);
    if (name.empty() || gt == std::string_view::npos) {
      if (!_saw_valid_line) throw ParseError("line " + std::to_string(_line_no) + ": not strace output");
      skip(false);
      return false;
    }
    _saw_valid_line = true;
    std::string key = std::to_string(pid) + "/" + name;
    auto it = _pending.find(key);
    if (it == _pending.end()) {
      _diag.dropped_resumed++;
      _diag.note("resumed without unfinished: " + name + " (line " + std::to_string(_line_no) + ")");
      return false;
    }
    std::string merged = it->second;
    merged.append(rest.substr(gt + 8));
    _pending.erase(it);
    _diag.merged_fragments++;

    size_t close = find_args_end(merged, 0);
    if (close == std::string::npos) {
      _diag.skipped_lines++;
      return false;
    }
    std::string_view after = trim(std::string_view(merged).substr(close + 1));
    if (after.empty() || after.front() != '=') {
      _diag.skipped_lines++;
      return false;
    }
    out->pid = pid;
    out->name = std::move(name);
    out->args.clear();
    out->line_no = _line_no;
    out->raw_line = _line;
    out->retval = Retval{};
    if (!parse_retval(after.substr(1), &out->retval)) {
      _diag.skipped_lines++;
      return false;
    }
    if (!_want_args || _want_args(out->name))
      split_args(std::string_view(merged).substr(0, close), &out->args);
    return true;
  }

  // Ordinary or unfinished call line.
  size_t name_end = 0;
  while (name_end < rest.size() && is_ident_char(rest[name_end])) name_end++;
  if (name_end == 0 || name_end >= rest.size() || rest[name_end] != '(') {
    if (!_saw_valid_line) throw ParseError("line " + std::to_string(_line_no) + ": not strace output");
    skip(false);
    return false;
  }
  std::string name(rest.substr(0, name_end));
  std::string_view args_on = rest.substr(name_end + 1);

  constexpr std::string_view kUnfinished = "<unfinished ...>";
  std::string_view trimmed_args = trim(args_on);
  if (trimmed_args.size() >= kUnfinished.size() &&
      trimmed_args.substr(trimmed_args.size() - kUnfinished.size()) == kUnfinished) {
    _saw_valid_line = true;
    std::string_view partial = trimmed_args;
    partial.remove_suffix(kUnfinished.size());
    std::string key = std::to_string(pid) + "/" + name;
    auto prev = _pending.find(key);
    if (prev != _pending.end()) {
      // A second unfinished call of the same name before any resume: the
      // older half can never match now.
      _diag.dropped_resumed++;
      prev->second.assign(partial);
    } else {
      _pending.emplace(std::move(key), std::string(partial));
    }
    return false;
  }

  size_t close = find_args_end(rest, name_end + 1);
  if (close == std::string_view::npos) {
    if (!_saw_valid_line) throw ParseError("line " + std::to_string(_line_no) + ": not strace output");
    skip(false);
    return false;
  }
  std::string_view after = trim(rest.substr(close + 1));
  if (after.empty() || after.front() != '=') {
    if (!_saw_valid_line) throw ParseError("line " + std::to_string(_line_no) + ": not strace output");
    skip(false);
    return false;
  }
  Retval rv;
  if (!parse_retval(after.substr(1), &rv)) {
    skip(false);
    return false;
  }
  _saw_valid_line = true;
  out->pid = pid;
  out->name = std::move(name);
  out->args.clear();
  out->retval = rv;
  out->line_no = _line_no;
  out->raw_line = _line;
  if (!_want_args || _want_args(out->name))
    split_args(rest.substr(name_end + 1, close - name_end - 1), &out->args);
  return true;
}

std::string TraceEntry::render() const {
  std::string s = std::to_string(pid);
  s += "   ";
  s += name;
  s += '(';
  for (size_t i = 0; i < args.size(); i++) {
    if (i) s += ", ";
    s += args[i];
  }
  s += ") = ";
  if (!retval.known) {
    s += '?';
  } else {
    s += std::to_string(retval.value);
    if (!retval.err.empty()) {
      s += ' ';
      s += retval.err;
    }
  }
  return s;
}

}  // namespace fsracer
