#include "fsracer.h"

#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "depgraph.hpp"
#include "gen.hpp"
#include "pipeline.hpp"

namespace {

thread_local std::string g_last_error = "";

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(malloc(s.size() + 1));
  if (out) memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct fsr_options {
  fsracer::AnalyzeOptions opts;
  bool containment_edges = true;
};

struct fsr_graph {
  fsracer::DepGraph graph;
  fsracer::Diagnostics diag;
};

struct fsr_analysis {
  fsracer::AnalyzeResult result;
};

extern "C" {

const char* fsr_version(void) { return "1.0.0"; }

const char* fsr_last_error(void) { return g_last_error.c_str(); }

void fsr_string_free(char* s) { free(s); }

fsr_options* fsr_options_new(void) { return new fsr_options(); }

void fsr_options_free(fsr_options* o) { delete o; }

fsr_status fsr_options_set_cwd(fsr_options* o, const char* cwd) {
  if (!o || !cwd || !*cwd) {
    set_error("cwd must be non-empty");
    return FSR_EINVAL;
  }
  o->opts.cwd = cwd;
  return FSR_OK;
}

fsr_status fsr_options_set_tagger(fsr_options* o, const char* tagger) {
  if (!o || !tagger) {
    set_error("tagger must be given");
    return FSR_EINVAL;
  }
  std::string t = tagger;
  if (t == "puppet") {
    o->opts.puppet_tagger = true;
  } else if (t == "null") {
    o->opts.puppet_tagger = false;
  } else {
    set_error("unknown tagger: " + t);
    return FSR_EINVAL;
  }
  return FSR_OK;
}

fsr_status fsr_options_add_ignore(fsr_options* o, const char* prefix) {
  if (!o || !prefix || !*prefix) {
    set_error("ignore prefix must be non-empty");
    return FSR_EINVAL;
  }
  o->opts.detector.ignore_prefixes.emplace_back(prefix);
  return FSR_OK;
}

fsr_status fsr_options_clear_ignores(fsr_options* o) {
  if (!o) return FSR_EINVAL;
  o->opts.detector.ignore_prefixes.clear();
  return FSR_OK;
}

fsr_status fsr_options_set_expunge_as_produce(fsr_options* o, int on) {
  if (!o) return FSR_EINVAL;
  o->opts.detector.expunge_as_produce = on != 0;
  return FSR_OK;
}

fsr_status fsr_options_set_containment_edges(fsr_options* o, int on) {
  if (!o) return FSR_EINVAL;
  o->containment_edges = on != 0;
  return FSR_OK;
}

fsr_status fsr_options_set_rules_json(fsr_options* o, const char* json_text) {
  if (!o || !json_text) return FSR_EINVAL;
  o->opts.modeler_rules_json = json_text;
  return FSR_OK;
}

static bool read_input(const char* path, std::string* out) {
  if (std::strcmp(path, "-") == 0) {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    *out = ss.str();
    return true;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  *out = ss.str();
  return true;
}

fsr_graph* fsr_graph_load_json(const char* text, const fsr_options* o) {
  if (!text) {
    set_error("catalog text must be given");
    return nullptr;
  }
  bool containment = o ? o->containment_edges : true;
  auto g = std::make_unique<fsr_graph>();
  try {
    g->graph = fsracer::DepGraph::from_catalog_json(text, g->diag, containment);
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
  return g.release();
}

fsr_graph* fsr_graph_load_file(const char* path, const fsr_options* o) {
  if (!path) {
    set_error("catalog path must be given");
    return nullptr;
  }
  std::string text;
  if (!read_input(path, &text)) {
    set_error(std::string("cannot read catalog: ") + path);
    return nullptr;
  }
  return fsr_graph_load_json(text.c_str(), o);
}

void fsr_graph_free(fsr_graph* g) { delete g; }

char* fsr_graph_dot(const fsr_graph* g) {
  if (!g) return nullptr;
  return dup_string(g->graph.dot());
}

int fsr_graph_happens_before(const fsr_graph* g, const char* a, const char* b) {
  if (!g || !a || !b) return 0;
  return g->graph.happens_before(a, b) ? 1 : 0;
}

int fsr_graph_notifies(const fsr_graph* g, const char* a, const char* b) {
  if (!g || !a || !b) return 0;
  return g->graph.notifies(a, b) ? 1 : 0;
}

size_t fsr_graph_node_count(const fsr_graph* g) { return g ? g->graph.node_count() : 0; }

size_t fsr_graph_edge_count(const fsr_graph* g) { return g ? g->graph.edge_count() : 0; }

fsr_analysis* fsr_analyze_file(const char* trace_path, const fsr_graph* g,
                               const fsr_options* o) {
  if (!trace_path || !g) {
    set_error("trace path and graph must be given");
    return nullptr;
  }
  fsracer::AnalyzeOptions opts = o ? o->opts : fsracer::AnalyzeOptions{};
  auto a = std::make_unique<fsr_analysis>();
  try {
    if (std::strcmp(trace_path, "-") == 0) {
      a->result = fsracer::run_analysis(std::cin, g->graph, opts);
    } else {
      std::ifstream in(trace_path, std::ios::binary);
      if (!in) {
        set_error(std::string("cannot read trace: ") + trace_path);
        return nullptr;
      }
      a->result = fsracer::run_analysis(in, g->graph, opts);
    }
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
  return a.release();
}

void fsr_analysis_free(fsr_analysis* a) { delete a; }

size_t fsr_analysis_fault_count(const fsr_analysis* a) {
  return a ? a->result.report.faults.size() : 0;
}

static const fsracer::Fault* fault_at(const fsr_analysis* a, size_t i) {
  if (!a || i >= a->result.report.faults.size()) return nullptr;
  return &a->result.report.faults[i];
}

const char* fsr_analysis_fault_kind(const fsr_analysis* a, size_t i) {
  const auto* f = fault_at(a, i);
  return f ? f->kind.c_str() : nullptr;
}

const char* fsr_analysis_fault_producer(const fsr_analysis* a, size_t i) {
  const auto* f = fault_at(a, i);
  return f ? f->producer.c_str() : nullptr;
}

const char* fsr_analysis_fault_consumer(const fsr_analysis* a, size_t i) {
  const auto* f = fault_at(a, i);
  return f ? f->consumer.c_str() : nullptr;
}

const char* fsr_analysis_fault_detail(const fsr_analysis* a, size_t i) {
  const auto* f = fault_at(a, i);
  return f ? f->detail.c_str() : nullptr;
}

size_t fsr_analysis_fault_path_count(const fsr_analysis* a, size_t i) {
  const auto* f = fault_at(a, i);
  return f ? f->paths.size() : 0;
}

const char* fsr_analysis_fault_path(const fsr_analysis* a, size_t i, size_t j) {
  const auto* f = fault_at(a, i);
  if (!f || j >= f->paths.size()) return nullptr;
  return f->paths[j].c_str();
}

char* fsr_analysis_report_text(const fsr_analysis* a) {
  return a ? dup_string(a->result.report.to_text()) : nullptr;
}

char* fsr_analysis_report_json(const fsr_analysis* a) {
  return a ? dup_string(fsracer::report_to_json(a->result)) : nullptr;
}

char* fsr_analysis_effects_json(const fsr_analysis* a) {
  return a ? dup_string(fsracer::effects_to_json(a->result.effects)) : nullptr;
}

char* fsr_analysis_summary(const fsr_analysis* a) {
  return a ? dup_string(fsracer::summary_line(a->result)) : nullptr;
}

int fsr_analysis_empty_trace(const fsr_analysis* a) {
  return a && a->result.empty_trace ? 1 : 0;
}

int fsr_analysis_zero_blocks(const fsr_analysis* a) {
  return a && a->result.zero_blocks ? 1 : 0;
}

uint64_t fsr_analysis_metric(const fsr_analysis* a, const char* name) {
  if (!a || !name) return 0;
  const auto& m = a->result.metrics;
  const auto& d = a->result.diag;
  std::string n = name;
  if (n == "lines") return m.lines;
  if (n == "entries") return m.entries;
  if (n == "blocks") return m.blocks;
  if (n == "paths") return m.paths;
  if (n == "trace_bytes") return m.trace_bytes;
  if (n == "skipped_lines") return d.skipped_lines;
  if (n == "merged_fragments") return d.merged_fragments;
  if (n == "dropped_resumed") return d.dropped_resumed;
  if (n == "truncated_paths") return d.truncated_paths;
  if (n == "tagger_warnings") return d.tagger_warnings;
  if (n == "interp_errors") return d.interp_errors;
  if (n == "inodes") return m.interp.inodes;
  if (n == "effects") return m.interp.effects;
  if (n == "graph_nodes") return m.graph_nodes;
  if (n == "graph_edges") return m.graph_edges;
  if (n == "max_rss_kb") return static_cast<uint64_t>(m.max_rss_kb);
  if (n == "parse_ms") return static_cast<uint64_t>(m.parse_seconds * 1000.0);
  if (n == "detect_ms") return static_cast<uint64_t>(m.detect_seconds * 1000.0);
  return 0;
}

fsr_status fsr_generate(uint64_t size_bytes, uint32_t blocks, uint32_t paths,
                        uint64_t seed, const char* faults, const char* out_dir) {
  if (!out_dir || !*out_dir) {
    set_error("output directory must be given");
    return FSR_EINVAL;
  }
  fsracer::GenSpec spec;
  spec.size_bytes = size_bytes;
  spec.blocks = blocks;
  spec.paths = paths;
  spec.seed = seed;
  if (faults && *faults) {
    std::string text = faults;
    size_t start = 0;
    while (start < text.size()) {
      size_t end = text.find(';', start);
      if (end == std::string::npos) end = text.size();
      std::string item = text.substr(start, end - start);
      start = end + 1;
      if (item.empty()) continue;
      fsracer::GenSpec::Fault f;
      size_t colon = item.find(':');
      std::string kind = colon == std::string::npos ? "" : item.substr(0, colon);
      if (kind == "mor") {
        f.mn = false;
      } else if (kind == "mn") {
        f.mn = true;
      } else {
        set_error("fault spec items look like mor:A,B or mn:A,B; got: " + item);
        return FSR_EINVAL;
      }
      size_t comma = item.find(',', colon);
      if (comma == std::string::npos) {
        set_error("fault spec items look like mor:A,B or mn:A,B; got: " + item);
        return FSR_EINVAL;
      }
      try {
        f.producer = static_cast<uint32_t>(std::stoul(item.substr(colon + 1, comma - colon - 1)));
        f.consumer = static_cast<uint32_t>(std::stoul(item.substr(comma + 1)));
      } catch (const std::exception&) {
        set_error("fault spec items look like mor:A,B or mn:A,B; got: " + item);
        return FSR_EINVAL;
      }
      spec.faults.push_back(f);
    }
  }

  std::string dir = out_dir;
  std::ofstream trace(dir + "/trace.strace", std::ios::binary);
  if (!trace) {
    set_error("cannot write to " + dir);
    return FSR_EIO;
  }
  fsracer::GenOutput out;
  try {
    out = fsracer::generate(spec, trace);
  } catch (const std::exception& e) {
    set_error(e.what());
    return FSR_EINVAL;
  }
  trace.close();
  std::ofstream catalog(dir + "/catalog.json", std::ios::binary);
  std::ofstream truth(dir + "/ground_truth.json", std::ios::binary);
  if (!catalog || !truth) {
    set_error("cannot write to " + dir);
    return FSR_EIO;
  }
  catalog << out.catalog_json << '\n';
  truth << out.ground_truth_json << '\n';
  return FSR_OK;
}

}  // extern "C"
