#include "pipeline.hpp"

#include <sys/resource.h>

#include <chrono>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "modeler.hpp"
#include "parser.hpp"

namespace fsracer {

namespace {

constexpr const char* kBottomLabel = "⊥";

long max_rss_kb() {
  struct rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return ru.ru_maxrss;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

AnalyzeResult run_analysis(std::istream& trace, const DepGraph& graph,
                           const AnalyzeOptions& opts) {
  AnalyzeResult result;
  Diagnostics& diag = result.diag;

  Modeler modeler(diag);
  if (!opts.modeler_rules_json.empty()) modeler.load_rules(opts.modeler_rules_json);

  // Arguments are only tokenized for calls the pipeline actually reads.
  std::set<std::string> wanted = {"write"};
  for (const auto& [name, _] : modeler.rules()) wanted.insert(name);
  for (const char* name :
       {"open", "openat", "creat", "close", "dup", "dup2", "dup3", "fcntl", "fcntl64", "chdir",
        "fchdir", "fork", "vfork", "clone", "clone3", "link", "linkat", "rename", "renameat",
        "renameat2", "symlink", "symlinkat"})
    wanted.insert(name);
  TraceParser parser(trace, diag,
                     [&wanted](std::string_view name) { return wanted.count(std::string(name)) != 0; });

  PuppetTagger puppet(diag);
  NullTagger null_tagger;
  Tagger& tagger = opts.puppet_tagger ? static_cast<Tagger&>(puppet) : null_tagger;

  Interp interp(diag, opts.cwd);

  auto t0 = std::chrono::steady_clock::now();
  while (auto entry = parser.next()) {
    Block block = tagger.tag(*entry);
    interp.step(*entry, block, modeler.model(*entry));
  }
  if (opts.puppet_tagger) puppet.finish();
  result.metrics.parse_seconds = seconds_since(t0);

  result.metrics.lines = parser.lines_read();
  result.metrics.trace_bytes = parser.bytes_read();
  result.metrics.entries = parser.entries_emitted();
  result.metrics.blocks = opts.puppet_tagger ? puppet.blocks_started() : 0;
  result.metrics.interp = interp.stats();
  result.metrics.paths = interp.effects().size();
  result.metrics.graph_nodes = graph.node_count();
  result.metrics.graph_edges = graph.edge_count();

  result.empty_trace = result.metrics.entries == 0;
  result.zero_blocks =
      opts.puppet_tagger && !result.empty_trace && result.metrics.blocks == 0;
  if (result.zero_blocks)
    diag.note("no evaluation markers found; was the agent run with its usual logging?");

  auto t1 = std::chrono::steady_clock::now();
  Detector detector(opts.detector);
  result.report = detector.run(interp.effects(), graph);
  result.metrics.detect_seconds = seconds_since(t1);
  result.metrics.max_rss_kb = max_rss_kb();

  result.effects = interp.effects();
  return result;
}

std::string effects_to_json(const EffectMap& effects) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [path, items] : effects) {
    nlohmann::json arr = nlohmann::json::array();
    for (const EffItem& it : items)
      arr.push_back({{"effect", effect_name(it.effect)},
                     {"block", it.block.empty() ? kBottomLabel : it.block}});
    doc[path] = std::move(arr);
  }
  return doc.dump(2);
}

std::string report_to_json(const AnalyzeResult& r) {
  nlohmann::json faults = nlohmann::json::array();
  for (const Fault& f : r.report.faults) {
    nlohmann::json jf = {{"kind", f.kind},
                         {"producer", f.producer},
                         {"consumer", f.consumer},
                         {"paths", f.paths}};
    if (!f.detail.empty()) jf["detail"] = f.detail;
    faults.push_back(std::move(jf));
  }
  nlohmann::json doc = {
      {"faults", std::move(faults)},
      {"counts", {{"mor", r.report.mor_count}, {"mn", r.report.mn_count}}},
      {"metrics",
       {{"trace_bytes", r.metrics.trace_bytes},
        {"lines", r.metrics.lines},
        {"entries", r.metrics.entries},
        {"blocks", r.metrics.blocks},
        {"paths", r.metrics.paths},
        {"graph_nodes", r.metrics.graph_nodes},
        {"graph_edges", r.metrics.graph_edges},
        {"parse_seconds", r.metrics.parse_seconds},
        {"detect_seconds", r.metrics.detect_seconds},
        {"max_rss_kb", r.metrics.max_rss_kb},
        {"inodes", r.metrics.interp.inodes},
        {"effects", r.metrics.interp.effects},
        {"resolve_memo_hits", r.metrics.interp.memo_hits},
        {"resolve_memo_misses", r.metrics.interp.memo_misses}}},
      {"diagnostics",
       {{"skipped_lines", r.diag.skipped_lines},
        {"merged_fragments", r.diag.merged_fragments},
        {"dropped_resumed", r.diag.dropped_resumed},
        {"truncated_paths", r.diag.truncated_paths},
        {"tagger_warnings", r.diag.tagger_warnings},
        {"interp_errors", r.diag.interp_errors},
        {"notes", r.diag.notes}}}};
  return doc.dump(2);
}

std::string summary_line(const AnalyzeResult& r) {
  char buf[256];
  snprintf(buf, sizeof(buf),
           "trace: %llu bytes, %llu entries, %llu blocks; parse %.3fs, detect %.3fs; "
           "faults: %zu",
           static_cast<unsigned long long>(r.metrics.trace_bytes),
           static_cast<unsigned long long>(r.metrics.entries),
           static_cast<unsigned long long>(r.metrics.blocks), r.metrics.parse_seconds,
           r.metrics.detect_seconds, r.report.faults.size());
  return buf;
}

}  // namespace fsracer
