#pragma once

#include <istream>
#include <string>

#include "depgraph.hpp"
#include "detector.hpp"
#include "diagnostics.hpp"
#include "interp.hpp"
#include "tagger.hpp"

namespace fsracer {

struct AnalyzeOptions {
  std::string cwd = "/";
  bool puppet_tagger = true;  // false: everything lands out-of-block
  DetectorOptions detector;
  std::string modeler_rules_json;  // optional mapping-table overrides
};

struct Metrics {
  uint64_t trace_bytes = 0;
  uint64_t lines = 0;
  uint64_t entries = 0;
  uint64_t blocks = 0;
  uint64_t paths = 0;
  size_t graph_nodes = 0;
  size_t graph_edges = 0;
  double parse_seconds = 0;
  double detect_seconds = 0;
  long max_rss_kb = 0;
  InterpStats interp;
};

struct AnalyzeResult {
  Report report;
  Diagnostics diag;
  Metrics metrics;
  EffectMap effects;
  bool empty_trace = false;
  bool zero_blocks = false;  // entries seen, puppet tagger, no markers
};

// Single ordered pass: parse -> tag -> model -> interpret, then detect.
AnalyzeResult run_analysis(std::istream& trace, const DepGraph& graph,
                           const AnalyzeOptions& opts);

std::string effects_to_json(const EffectMap& effects);
std::string report_to_json(const AnalyzeResult& result);
std::string summary_line(const AnalyzeResult& result);

}  // namespace fsracer
