// Command-line front end; talks to the analysis library through the C API
// only.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsracer.h"

namespace {

constexpr int kExitClean = 0;
constexpr int kExitFaults = 1;
constexpr int kExitError = 2;

struct OptionsHandle {
  fsr_options* ptr = fsr_options_new();
  ~OptionsHandle() { fsr_options_free(ptr); }
};

struct GraphHandle {
  fsr_graph* ptr = nullptr;
  ~GraphHandle() { fsr_graph_free(ptr); }
};

struct AnalysisHandle {
  fsr_analysis* ptr = nullptr;
  ~AnalysisHandle() { fsr_analysis_free(ptr); }
};

int die(const std::string& msg) {
  std::cerr << "fsracer: " << msg << "\n";
  return kExitError;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  fsr_string_free(s);
  return out;
}

void append_env_ignores(fsr_options* o) {
  const char* env = std::getenv("FSRACER_IGNORE");
  if (!env || !*env) return;
  std::string text = env;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find(':', start);
    if (end == std::string::npos) end = text.size();
    std::string prefix = text.substr(start, end - start);
    if (!prefix.empty()) fsr_options_add_ignore(o, prefix.c_str());
    if (end == text.size()) break;
    start = end + 1;
  }
}

struct AnalyzeArgs {
  std::string trace;
  std::string catalog;
  std::string format = "text";
  std::string dump_effects;
  std::string cwd = "/";
  std::string tagger = "puppet";
  std::string rules_file;
  std::vector<std::string> ignores;
  bool no_default_ignores = false;
  bool no_expunge_as_produce = false;
  bool no_containment_edges = false;
};

int run_analyze(const AnalyzeArgs& args) {
  OptionsHandle opts;
  if (fsr_options_set_cwd(opts.ptr, args.cwd.c_str()) != FSR_OK) return die(fsr_last_error());
  if (fsr_options_set_tagger(opts.ptr, args.tagger.c_str()) != FSR_OK)
    return die(fsr_last_error());
  if (args.no_default_ignores) fsr_options_clear_ignores(opts.ptr);
  for (const std::string& p : args.ignores)
    if (fsr_options_add_ignore(opts.ptr, p.c_str()) != FSR_OK) return die(fsr_last_error());
  append_env_ignores(opts.ptr);
  // The trace under analysis is itself a file the traced run may have written;
  // reads of it are tooling noise, not program dependencies.
  if (args.trace != "-") fsr_options_add_ignore(opts.ptr, args.trace.c_str());
  fsr_options_set_expunge_as_produce(opts.ptr, args.no_expunge_as_produce ? 0 : 1);
  fsr_options_set_containment_edges(opts.ptr, args.no_containment_edges ? 0 : 1);
  if (!args.rules_file.empty()) {
    std::ifstream in(args.rules_file);
    if (!in) return die("cannot read rules file: " + args.rules_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (fsr_options_set_rules_json(opts.ptr, ss.str().c_str()) != FSR_OK)
      return die(fsr_last_error());
  }

  GraphHandle graph;
  graph.ptr = fsr_graph_load_file(args.catalog.c_str(), opts.ptr);
  if (!graph.ptr) return die(fsr_last_error());

  AnalysisHandle analysis;
  analysis.ptr = fsr_analyze_file(args.trace.c_str(), graph.ptr, opts.ptr);
  if (!analysis.ptr) return die(fsr_last_error());

  if (!args.dump_effects.empty()) {
    std::ofstream out(args.dump_effects, std::ios::binary);
    if (!out) return die("cannot write effects dump: " + args.dump_effects);
    out << take(fsr_analysis_effects_json(analysis.ptr)) << "\n";
  }

  if (args.format == "json") {
    std::cout << take(fsr_analysis_report_json(analysis.ptr)) << "\n";
  } else {
    std::cout << take(fsr_analysis_report_text(analysis.ptr));
    std::cout << take(fsr_analysis_summary(analysis.ptr)) << "\n";
  }

  uint64_t skipped = fsr_analysis_metric(analysis.ptr, "skipped_lines");
  uint64_t merged = fsr_analysis_metric(analysis.ptr, "merged_fragments");
  uint64_t truncated = fsr_analysis_metric(analysis.ptr, "truncated_paths");
  if (skipped || merged || truncated)
    std::cerr << "fsracer: lines skipped " << skipped << ", merged " << merged
              << ", truncated paths " << truncated << "\n";

  if (fsr_analysis_empty_trace(analysis.ptr)) {
    std::cerr << "fsracer: warning: trace contains no entries\n";
    return kExitClean;
  }
  if (fsr_analysis_zero_blocks(analysis.ptr))
    return die(
        "no evaluation blocks found in a non-empty trace; "
        "run the agent with standard logging or pass --tagger null");
  return fsr_analysis_fault_count(analysis.ptr) ? kExitFaults : kExitClean;
}

int run_graph(const std::string& catalog, bool no_containment) {
  OptionsHandle opts;
  fsr_options_set_containment_edges(opts.ptr, no_containment ? 0 : 1);
  GraphHandle graph;
  graph.ptr = fsr_graph_load_file(catalog.c_str(), opts.ptr);
  if (!graph.ptr) return die(fsr_last_error());
  std::cout << take(fsr_graph_dot(graph.ptr));
  return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"file-system race analysis for recorded system-call traces"};
  app.require_subcommand(1);

  AnalyzeArgs aa;
  CLI::App* analyze = app.add_subcommand("analyze", "analyze a trace against a catalog");
  analyze->add_option("--trace", aa.trace, "strace output file, or - for stdin")->required();
  analyze->add_option("--catalog", aa.catalog, "compiled catalog JSON")->required();
  analyze->add_option("--format", aa.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  analyze->add_option("--dump-effects", aa.dump_effects, "write the effect map as JSON");
  analyze->add_option("--ignore", aa.ignores, "extra ignore prefix (repeatable)");
  analyze->add_option("--cwd", aa.cwd, "initial working directory of the traced process");
  analyze->add_option("--tagger", aa.tagger, "puppet or null")
      ->check(CLI::IsMember({"puppet", "null"}));
  analyze->add_option("--rules", aa.rules_file, "syscall mapping overrides (JSON)");
  analyze->add_flag("--no-default-ignores", aa.no_default_ignores,
                    "start with an empty ignore list");
  analyze->add_flag("--no-expunge-as-produce", aa.no_expunge_as_produce,
                    "do not pair deletions as productions");
  analyze->add_flag("--no-containment-edges", aa.no_containment_edges,
                    "ignore catalog containment edges");

  std::string graph_catalog;
  bool graph_no_containment = false;
  CLI::App* graph = app.add_subcommand("graph", "dump the dependency graph as DOT");
  graph->add_option("--catalog", graph_catalog, "compiled catalog JSON")->required();
  graph->add_flag("--no-containment-edges", graph_no_containment,
                  "ignore catalog containment edges");

  uint64_t gen_size = 1024;
  uint32_t gen_blocks = 2;
  uint32_t gen_paths = 1;
  uint64_t gen_seed = 0;
  std::string gen_out;
  std::vector<std::string> gen_mor, gen_mn;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic trace + catalog + ground truth");
  gen->add_option("--size", gen_size, "approximate trace size in bytes");
  gen->add_option("--blocks", gen_blocks, "number of execution blocks");
  gen->add_option("--paths", gen_paths, "size of the path pool");
  gen->add_option("--seed", gen_seed, "RNG seed; fixes all output bytes");
  gen->add_option("--out", gen_out, "output directory (must exist)")->required();
  gen->add_option("--inject-mor", gen_mor, "producer,consumer block numbers (repeatable)");
  gen->add_option("--inject-mn", gen_mn, "producer,consumer block numbers (repeatable)");

  std::string run_out = "trace.strace";
  std::string run_catalog;
  std::vector<std::string> run_cmd;
  CLI::App* runc = app.add_subcommand("run", "trace a command with strace, then analyze");
  runc->add_option("--out", run_out, "where to store the recorded trace");
  runc->add_option("--catalog", run_catalog, "analyze against this catalog afterwards");
  runc->add_option("command", run_cmd, "command to trace (prefix with --)")->required();

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) return run_analyze(aa);
  if (graph->parsed()) return run_graph(graph_catalog, graph_no_containment);

  if (gen->parsed()) {
    std::string faults;
    for (const std::string& v : gen_mor) faults += (faults.empty() ? "" : ";") + ("mor:" + v);
    for (const std::string& v : gen_mn) faults += (faults.empty() ? "" : ";") + ("mn:" + v);
    fsr_status st =
        fsr_generate(gen_size, gen_blocks, gen_paths, gen_seed, faults.c_str(), gen_out.c_str());
    if (st != FSR_OK) return die(fsr_last_error());
    std::cout << gen_out << "/trace.strace\n"
              << gen_out << "/catalog.json\n"
              << gen_out << "/ground_truth.json\n";
    return kExitClean;
  }

  if (runc->parsed()) {
    if (std::system("command -v strace >/dev/null 2>&1") != 0)
      return die("strace not found on PATH; record a trace elsewhere and use `analyze`");
    std::string cmd = "strace -f -y -s 4096 -o '" + run_out + "' --";
    for (const std::string& part : run_cmd) cmd += " '" + part + "'";
    int rc = std::system(cmd.c_str());
    if (rc != 0) std::cerr << "fsracer: traced command exited with status " << rc << "\n";
    std::cerr << "fsracer: trace written to " << run_out << "\n";
    if (run_catalog.empty()) return kExitClean;
    AnalyzeArgs args;
    args.trace = run_out;
    args.catalog = run_catalog;
    return run_analyze(args);
  }

  return kExitError;
}
