#include <doctest.h>

#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "tagger.hpp"
#include "trace.hpp"

using namespace fsracer;

namespace {

TraceEntry write_entry(int64_t pid, int fd, const std::string& payload) {
  TraceEntry e;
  e.pid = pid;
  e.name = "write";
  e.args = {std::to_string(fd), "\"" + payload + "\""};
  e.retval = Retval{static_cast<int64_t>(payload.size()), "", true};
  return e;
}

TraceEntry call_entry(int64_t pid, const std::string& name = "stat") {
  TraceEntry e;
  e.pid = pid;
  e.name = name;
  e.retval = Retval{0, "", true};
  return e;
}

std::string begin_marker(const std::string& resource) {
  return "Info: " + resource + ": Starting to evaluate the resource\\n";
}

std::string end_marker(const std::string& resource) {
  return "Info: " + resource + ": Evaluated in 0.01 seconds\\n";
}

}  // namespace

TEST_CASE("block_name keeps separators inside brackets") {
  CHECK(PuppetTagger::block_name("/Stage[main]/Ntp/File[/etc/ntp.conf]") ==
        "File[/etc/ntp.conf]");
  CHECK(PuppetTagger::block_name("/Stage[main]/Foo/Exec[run/me now]") == "Exec[run/me now]");
  CHECK(PuppetTagger::block_name("File[/a]") == "File[/a]");
  CHECK(PuppetTagger::block_name("/Stage[main]/Apache::Vhost[a/b]/File[/x]") == "File[/x]");
  CHECK(PuppetTagger::block_name("") == "");
}

TEST_CASE("entries partition into blocks by marker position") {
  Diagnostics d;
  PuppetTagger t(d);
  const std::string res = "/Stage[main]/Ntp/Package[ntp]";

  CHECK(t.tag(call_entry(100)).is_bottom());          // before any marker
  Block mk = t.tag(write_entry(100, 1, begin_marker(res)));
  CHECK(mk.is_bottom());                              // the marker write itself
  Block in1 = t.tag(call_entry(100));
  CHECK(in1.name == "Package[ntp]");
  CHECK(in1.ordinal == 1);
  Block in2 = t.tag(call_entry(205));                 // other pid, same window
  CHECK(in2.name == "Package[ntp]");
  CHECK(t.tag(write_entry(100, 1, end_marker(res))).is_bottom());
  CHECK(t.tag(call_entry(100)).is_bottom());
  CHECK(d.tagger_warnings == 0);
  CHECK(t.blocks_started() == 1);
  REQUIRE(t.block_names().size() == 1);
  CHECK(t.block_names()[0] == "Package[ntp]");
}

TEST_CASE("ordinals count begin events, names stay unique") {
  Diagnostics d;
  PuppetTagger t(d);
  const std::string a = "/Stage[main]/M/File[/a]";
  const std::string b = "/Stage[main]/M/File[/b]";

  t.tag(write_entry(9, 1, begin_marker(a)));
  CHECK(t.tag(call_entry(9)).ordinal == 1);
  t.tag(write_entry(9, 1, end_marker(a)));
  t.tag(write_entry(9, 1, begin_marker(b)));
  CHECK(t.tag(call_entry(9)).ordinal == 2);
  t.tag(write_entry(9, 1, end_marker(b)));
  t.tag(write_entry(9, 1, begin_marker(a)));  // same resource again
  Block again = t.tag(call_entry(9));
  CHECK(again.name == "File[/a]");
  CHECK(again.ordinal == 3);
  CHECK(t.blocks_started() == 3);
  CHECK(t.block_names() == std::vector<std::string>{"File[/a]", "File[/b]"});
}

TEST_CASE("a nested begin closes the open block with a warning") {
  Diagnostics d;
  PuppetTagger t(d);
  t.tag(write_entry(1, 1, begin_marker("/Stage[main]/M/File[/a]")));
  t.tag(write_entry(1, 1, begin_marker("/Stage[main]/M/File[/b]")));
  CHECK(t.tag(call_entry(1)).name == "File[/b]");
  CHECK(d.tagger_warnings == 1);
}

TEST_CASE("mismatched and orphaned end markers warn") {
  Diagnostics d;
  PuppetTagger t(d);
  t.tag(write_entry(1, 1, end_marker("/Stage[main]/M/File[/a]")));
  CHECK(d.tagger_warnings == 1);  // end without open block

  t.tag(write_entry(1, 1, begin_marker("/Stage[main]/M/File[/a]")));
  t.tag(write_entry(1, 1, end_marker("/Stage[main]/M/File[/b]")));
  CHECK(d.tagger_warnings == 2);  // wrong name still closes
  CHECK(t.tag(call_entry(1)).is_bottom());
}

TEST_CASE("markers split across writes still register") {
  Diagnostics d;
  PuppetTagger t(d);
  const std::string whole = begin_marker("/Stage[main]/Ntp/Service[ntp]");
  std::string head = whole.substr(0, 30);
  std::string tail = whole.substr(30);
  CHECK(t.tag(write_entry(5, 1, head)).is_bottom());   // incomplete: no marker yet
  CHECK(t.tag(write_entry(5, 1, tail)).is_bottom());   // completes the marker
  CHECK(t.tag(call_entry(5)).name == "Service[ntp]");
}

TEST_CASE("two markers inside one write both fire") {
  Diagnostics d;
  PuppetTagger t(d);
  const std::string res = "/Stage[main]/M/File[/a]";
  t.tag(write_entry(3, 1, begin_marker(res) + end_marker(res)));
  CHECK(t.tag(call_entry(3)).is_bottom());
  CHECK(t.blocks_started() == 1);
  CHECK(d.tagger_warnings == 0);
}

TEST_CASE("only the root process's stdout and stderr are scanned") {
  Diagnostics d;
  PuppetTagger t(d);
  t.tag(call_entry(42));  // first pid seen becomes the root
  t.tag(write_entry(99, 1, begin_marker("/Stage[main]/M/File[/other]")));
  CHECK(t.tag(call_entry(42)).is_bottom());
  t.tag(write_entry(42, 3, begin_marker("/Stage[main]/M/File[/fd3]")));
  CHECK(t.tag(call_entry(42)).is_bottom());
  t.tag(write_entry(42, 2, begin_marker("/Stage[main]/M/File[/fd2]")));
  CHECK(t.tag(call_entry(42)).name == "File[/fd2]");
}

TEST_CASE("finish notes a block left open") {
  Diagnostics d;
  PuppetTagger t(d);
  t.tag(write_entry(1, 1, begin_marker("/Stage[main]/M/File[/a]")));
  t.tag(call_entry(1));
  t.finish();
  REQUIRE(!d.notes.empty());
  CHECK(d.notes.back().find("still open") != std::string::npos);
}

TEST_CASE("the null tagger never assigns a block") {
  NullTagger t;
  CHECK(t.tag(call_entry(1)).is_bottom());
  CHECK(t.block_names().empty());
}
