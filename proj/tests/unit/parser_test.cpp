#include <doctest.h>

#include <sstream>

#include "diagnostics.hpp"
#include "parser.hpp"

#include "../support/oracles.hpp"

using namespace fsracer;

namespace {

std::vector<TraceEntry> parse_all(const std::string& text, Diagnostics& diag,
                                  TraceParser::NameFilter filter = nullptr) {
  std::istringstream in(text);
  TraceParser p(in, diag, std::move(filter));
  std::vector<TraceEntry> out;
  while (auto e = p.next()) out.push_back(std::move(*e));
  return out;
}

}  // namespace

TEST_CASE("pid prefixes and the single-process default") {
  Diagnostics d;
  auto es = parse_all(
      "open(\"/a\", O_RDONLY) = 3\n"
      "103   open(\"/b\", O_RDONLY) = 4\n"
      "[pid 207] open(\"/c\", O_RDONLY) = 5\n",
      d);
  REQUIRE(es.size() == 3);
  CHECK(es[0].pid == 1);
  CHECK(es[1].pid == 103);
  CHECK(es[2].pid == 207);
  CHECK(es[0].name == "open");
  REQUIRE(es[0].args.size() == 2);
  CHECK(es[0].args[0] == "\"/a\"");
  CHECK(es[0].args[1] == "O_RDONLY");
  CHECK(d.total() == 0);
}

TEST_CASE("timestamps are skipped, with or without a pid") {
  Diagnostics d;
  auto es = parse_all(
      "103   14:05:01.123456 open(\"/a\", O_RDONLY) = 3\n"
      "1550000000.123456 close(3) = 0\n"
      "14:05:01 chdir(\"/tmp\") = 0\n",
      d);
  REQUIRE(es.size() == 3);
  CHECK(es[0].pid == 103);
  CHECK(es[0].name == "open");
  CHECK(es[1].pid == 1);
  CHECK(es[1].name == "close");
  CHECK(es[2].name == "chdir");
}

TEST_CASE("return value forms") {
  Diagnostics d;
  auto es = parse_all(
      "a(1) = 0\n"
      "b(1) = -1 ENOENT (No such file or directory)\n"
      "c(1) = ?\n"
      "d(1) = 0x7f32 (flags O_RDONLY)\n"
      "e(1) = 3</var/log/x>\n",
      d);
  REQUIRE(es.size() == 5);
  CHECK(es[0].retval.ok());
  CHECK(es[0].retval.value == 0);
  CHECK(!es[1].retval.ok());
  CHECK(es[1].retval.value == -1);
  CHECK(es[1].retval.err == "ENOENT");
  CHECK(!es[2].retval.known);
  CHECK(es[3].retval.value == 0x7f32);
  CHECK(es[3].retval.ok());
  CHECK(es[4].retval.value == 3);
  CHECK(es[4].retval.err.empty());
}

TEST_CASE("signals, exits and strace chatter are counted, not parsed") {
  Diagnostics d;
  auto es = parse_all(
      "getpid() = 7\n"
      "--- SIGCHLD {si_signo=SIGCHLD, si_code=CLD_EXITED} ---\n"
      "+++ exited with 0 +++\n"
      "strace: Process 321 attached\n",
      d);
  CHECK(es.size() == 1);
  CHECK(d.skipped_lines == 3);
  CHECK(d.dropped_resumed == 0);
}

TEST_CASE("unfinished and resumed halves are stitched at the resume position") {
  Diagnostics d;
  auto es = parse_all(
      "100   open(\"/a\", O_RDONLY <unfinished ...>\n"
      "200   open(\"/b\", O_RDONLY) = 4\n"
      "100   <... open resumed> ) = 3\n",
      d);
  REQUIRE(es.size() == 2);
  // the interleaved call from the other process comes first
  CHECK(es[0].pid == 200);
  CHECK(es[1].pid == 100);
  CHECK(es[1].name == "open");
  REQUIRE(es[1].args.size() == 2);
  CHECK(es[1].args[0] == "\"/a\"");
  CHECK(es[1].retval.value == 3);
  CHECK(d.merged_fragments == 1);
  CHECK(d.dropped_resumed == 0);
}

TEST_CASE("stitching is keyed by pid and name") {
  Diagnostics d;
  auto es = parse_all(
      "100   open(\"/a\", O_RDONLY <unfinished ...>\n"
      "200   open(\"/b\", O_WRONLY <unfinished ...>\n"
      "200   <... open resumed> ) = 5\n"
      "100   <... open resumed> ) = 3\n",
      d);
  REQUIRE(es.size() == 2);
  CHECK(es[0].pid == 200);
  CHECK(es[0].args[0] == "\"/b\"");
  CHECK(es[0].retval.value == 5);
  CHECK(es[1].pid == 100);
  CHECK(es[1].args[0] == "\"/a\"");
  CHECK(es[1].retval.value == 3);
  CHECK(d.merged_fragments == 2);
}

TEST_CASE("orphaned halves are dropped and counted") {
  Diagnostics d;
  auto es = parse_all(
      "getpid() = 7\n"
      "100   <... open resumed> ) = 3\n"   // resume without unfinished
      "100   stat(\"/x\" <unfinished ...>\n"  // unfinished without resume
      "getpid() = 8\n",
      d);
  CHECK(es.size() == 2);
  CHECK(d.dropped_resumed == 2);
}

TEST_CASE("a second unfinished call replaces a stale one") {
  Diagnostics d;
  auto es = parse_all(
      "100   open(\"/stale\", O_RDONLY <unfinished ...>\n"
      "100   open(\"/fresh\", O_RDONLY <unfinished ...>\n"
      "100   <... open resumed> ) = 3\n",
      d);
  REQUIRE(es.size() == 1);
  CHECK(es[0].args[0] == "\"/fresh\"");
  CHECK(d.dropped_resumed == 1);
  CHECK(d.merged_fragments == 1);
}

TEST_CASE("descriptor decorations are stripped from arguments") {
  Diagnostics d;
  auto es = parse_all(
      "openat(AT_FDCWD</root>, \"/etc/ntp.conf\", O_RDONLY) = 3</etc/ntp.conf>\n"
      "close(3</etc/ntp.conf>) = 0\n"
      "dup2(3</a>, 7</b>) = 7\n",
      d);
  REQUIRE(es.size() == 3);
  REQUIRE(es[0].args.size() == 3);
  CHECK(es[0].args[0] == "AT_FDCWD");
  CHECK(es[0].args[1] == "\"/etc/ntp.conf\"");
  CHECK(es[1].args[0] == "3");
  CHECK(es[2].args[0] == "3");
  CHECK(es[2].args[1] == "7");
}

TEST_CASE("nested argument structures stay one token") {
  Diagnostics d;
  auto es = parse_all(
      "stat(\"/a\", {st_mode=S_IFREG|0644, st_size=1024, ...}) = 0\n"
      "execve(\"/bin/sh\", [\"sh\", \"-c\", \"x, y\"], 0x7ffd /* 21 vars */) = 0\n",
      d);
  REQUIRE(es.size() == 2);
  REQUIRE(es[0].args.size() == 2);
  CHECK(es[0].args[1].front() == '{');
  REQUIRE(es[1].args.size() >= 2);
  CHECK(es[1].args[1] == "[\"sh\", \"-c\", \"x, y\"]");
}

TEST_CASE("string token decoding") {
  CHECK(decode_string_token("\"abc\"") == "abc");
  CHECK(decode_string_token("\"a\\nb\"") == "a\nb");
  CHECK(decode_string_token("\"a\\tb\\\\c\\\"d\"") == "a\tb\\c\"d");
  CHECK(decode_string_token("\"\\101\\102\"") == "AB");   // octal
  CHECK(decode_string_token("\"\\x41\\x42\"") == "AB");   // hex
  CHECK(decode_string_token("\"\\0\"") == std::string(1, '\0'));
  bool tr = false;
  CHECK(decode_string_token("\"/very/long/pa\"...", &tr) == "/very/long/pa");
  CHECK(tr);
  CHECK(token_is_truncated_string("\"abc\"..."));
  CHECK(!token_is_truncated_string("\"abc\""));
}

TEST_CASE("open flag parsing") {
  Diagnostics d;
  OpenFlagSet f = parse_open_flags("O_RDONLY", &d);
  CHECK(f.has(OpenFlag::read));
  CHECK(!f.has(OpenFlag::write));

  f = parse_open_flags("O_WRONLY|O_CREAT|O_TRUNC", &d);
  CHECK(f.has(OpenFlag::write));
  CHECK(f.has(OpenFlag::creat));
  CHECK(f.has(OpenFlag::trunc));
  CHECK(!f.has(OpenFlag::read));

  f = parse_open_flags("O_RDWR|O_CLOEXEC", &d);
  CHECK(f.has(OpenFlag::read));
  CHECK(f.has(OpenFlag::write));
  CHECK(d.interp_errors == 0);

  // no access mode at all: read assumed, and the oddity is counted
  f = parse_open_flags("O_CLOEXEC", &d);
  CHECK(f.has(OpenFlag::read));
  CHECK(d.interp_errors == 1);
}

TEST_CASE("garbage input fails fast, trailing garbage does not") {
  Diagnostics d;
  std::istringstream bad("This is not a trace.\nSecond line.\n");
  TraceParser p(bad, d);
  CHECK_THROWS_AS(p.next(), ParseError);

  Diagnostics d2;
  auto es = parse_all("getpid() = 7\nnot a syscall line\n", d2);
  CHECK(es.size() == 1);
  CHECK(d2.skipped_lines == 1);
}

TEST_CASE("the name filter skips argument splitting but keeps the entry") {
  Diagnostics d;
  auto es = parse_all(
      "read(3, \"data, with, commas\", 4096) = 18\n"
      "open(\"/a\", O_RDONLY) = 3\n",
      d, [](std::string_view n) { return n == "open"; });
  REQUIRE(es.size() == 2);
  CHECK(es[0].name == "read");
  CHECK(es[0].args.empty());
  CHECK(es[1].args.size() == 2);
}

TEST_CASE("every input line is accounted for exactly once") {
  // lines == entries + skipped + merged + dropped, on a messy generated trace
  testsupport::Rng rng(11);
  for (int round = 0; round < 50; round++) {
    std::string text;
    size_t lines = 40 + rng.below(40);
    for (size_t i = 0; i < lines; i++) {
      switch (rng.below(8)) {
        case 0: text += "100   getpid() = 7\n"; break;
        case 1: text += "200   open(\"/x\", O_RDONLY) = 3\n"; break;
        case 2: text += "--- SIGCHLD {} ---\n"; break;
        case 3: text += "+++ exited with 1 +++\n"; break;
        case 4: text += "100   open(\"/u\", O_RDONLY <unfinished ...>\n"; break;
        case 5: text += "100   <... open resumed> ) = 4\n"; break;
        case 6: text += "300   stat(\"/y\" <unfinished ...>\n"; break;
        default: text += "300   <... stat resumed> , {st_mode=0}) = 0\n"; break;
      }
    }
    Diagnostics d;
    std::istringstream in(text);
    TraceParser p(in, d);
    uint64_t entries = 0;
    while (p.next()) entries++;
    CHECK(p.lines_read() == entries + d.skipped_lines + d.merged_fragments + d.dropped_resumed);
    CHECK(p.entries_emitted() == entries);
    CHECK(p.bytes_read() == text.size());
  }
}

TEST_CASE("rendered entries parse back to themselves") {
  Diagnostics d;
  auto es = parse_all(
      "103   openat(AT_FDCWD, \"/etc/fstab\", O_RDONLY|O_CLOEXEC) = 3\n"
      "9   rename(\"/tmp/a\", \"/etc/b\") = 0\n"
      "77   stat(\"/gone\", 0x7ffc0) = -1 ENOENT (No such file)\n"
      "5   wait4(-1, NULL, 0, NULL) = ?\n",
      d);
  REQUIRE(es.size() == 4);
  for (const TraceEntry& e : es) {
    Diagnostics d2;
    auto back = parse_all(e.render() + "\n", d2);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == e);
  }
}
