#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "diagnostics.hpp"
#include "trace.hpp"

namespace fsracer {

// A task block of the configuration run. The empty name is the out-of-block
// region; entries tagged with it still drive interpretation state but are
// excluded from fault reports.
struct Block {
  std::string name;
  uint64_t ordinal = 0;

  bool is_bottom() const { return name.empty(); }
  bool operator==(const Block& o) const { return name == o.name; }
};

class Tagger {
 public:
  virtual ~Tagger() = default;
  // Attributes one entry to a block. Entries arrive in trace order.
  virtual Block tag(const TraceEntry& entry) = 0;
  virtual const std::vector<std::string>& block_names() const = 0;
};

// Tags nothing: every entry lands in the out-of-block region.
class NullTagger final : public Tagger {
 public:
  Block tag(const TraceEntry&) override { return Block{}; }
  const std::vector<std::string>& block_names() const override { return _names; }

 private:
  std::vector<std::string> _names;
};

// Recovers resource evaluation boundaries from the agent's console output.
// The agent prints
//   Info: <resource-path>: Starting to evaluate the resource
//   Info: <resource-path>: Evaluated in <t> seconds
// on stdout/stderr of the root process. Payloads are matched as substrings
// over a rolling per-fd buffer, so markers split across write calls or
// sharing one call still register.
class PuppetTagger final : public Tagger {
 public:
  explicit PuppetTagger(Diagnostics& diag) : _diag(diag) {}

  Block tag(const TraceEntry& entry) override;
  const std::vector<std::string>& block_names() const override { return _names; }
  uint64_t blocks_started() const { return _begin_events; }
  // Drops a block left open at stream end.
  void finish();

  // Trailing component of a resource path, with '/' inside brackets kept:
  // "/Stage[main]/Ntp/File[/etc/ntp.conf]" -> "File[/etc/ntp.conf]".
  static std::string block_name(std::string_view resource_path);

 private:
  void scan(std::string& buf);
  void open_block(std::string_view name);
  void close_block(std::string_view name);

  Diagnostics& _diag;
  int64_t _root_pid = -1;
  Block _current;
  uint64_t _begin_events = 0;
  uint64_t _marker_events = 0;
  std::map<int, std::string> _buffers;
  std::set<std::string> _known_names;
  std::vector<std::string> _names;
};

}  // namespace fsracer
