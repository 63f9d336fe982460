// Acceptance gate: one line per criterion, nonzero exit if any fails.
// Run as: acceptance <fixtures-dir>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "depgraph.hpp"
#include "gen.hpp"
#include "pipeline.hpp"
#include "support/construct_cases.hpp"
#include "support/oracles.hpp"

using namespace fsracer;

namespace {

std::string g_fixtures;

bool slurp(const std::string& path, std::string* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  *out = ss.str();
  return true;
}

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

// Analyzes one fixture pair; fills *why and returns false on setup trouble.
bool analyze_pair(const std::string& trace_name, const std::string& catalog_name,
                  AnalyzeResult* out, std::string* why, double* seconds = nullptr) {
  std::string catalog;
  if (!slurp(g_fixtures + "/" + catalog_name, &catalog)) {
    *why = "cannot read fixture " + catalog_name;
    return false;
  }
  std::ifstream trace(g_fixtures + "/" + trace_name, std::ios::binary);
  if (!trace) {
    *why = "cannot read fixture " + trace_name;
    return false;
  }
  try {
    Diagnostics d;
    DepGraph g = DepGraph::from_catalog_json(catalog, d);
    double t0 = now_seconds();
    *out = run_analysis(trace, g, AnalyzeOptions{});
    if (seconds) *seconds = now_seconds() - t0;
  } catch (const std::exception& e) {
    *why = std::string("fixture ") + trace_name + ": " + e.what();
    return false;
  }
  return true;
}

const Fault* single_fault_of_kind(const Report& r, const std::string& kind) {
  const Fault* found = nullptr;
  for (const Fault& f : r.faults) {
    if (f.kind != kind) continue;
    if (found) return nullptr;
    found = &f;
  }
  return found;
}

bool same_pair(const Fault& f, const std::string& a, const std::string& b) {
  return (f.producer == a && f.consumer == b) || (f.producer == b && f.consumer == a);
}

// 1. The ntp scenario: an unordered write/read of /etc/default/ntp between the
// file resource and the service must surface as exactly one MOR and one MN,
// and the repaired catalog must be silent. Both runs well under a second.
bool criterion1(std::string* line) {
  std::string why;
  AnalyzeResult broken, fixed;
  double secs1 = 0, secs2 = 0;
  if (!analyze_pair("ntp_trace.strace", "ntp_catalog.json", &broken, &why, &secs1) ||
      !analyze_pair("ntp_trace.strace", "ntp_catalog_fixed.json", &fixed, &why, &secs2)) {
    *line = why;
    return false;
  }
  const std::string file = "File[/etc/default/ntp]";
  const std::string service = "Service[ntp]";
  const Fault* mor = single_fault_of_kind(broken.report, "MOR");
  const Fault* mn = single_fault_of_kind(broken.report, "MN");
  if (broken.report.faults.size() != 2 || !mor || !mn) {
    *line = "expected exactly one MOR and one MN, got " + broken.report.to_text();
    return false;
  }
  if (!same_pair(*mor, file, service) || !same_pair(*mn, file, service)) {
    *line = "faults name the wrong blocks: " + broken.report.to_text();
    return false;
  }
  if (mor->paths != std::vector<std::string>{"/etc/default/ntp"}) {
    *line = "MOR witness path wrong";
    return false;
  }
  if (!fixed.report.faults.empty()) {
    *line = "repaired catalog still reports: " + fixed.report.to_text();
    return false;
  }
  if (secs1 + secs2 >= 1.0) {
    *line = "too slow: " + std::to_string(secs1 + secs2) + "s";
    return false;
  }
  char buf[128];
  snprintf(buf, sizeof buf, "1 MOR + 1 MN on the ntp pair, repaired catalog clean (%.3fs)",
           secs1 + secs2);
  *line = buf;
  return true;
}

// 2. Generate-use: a download step producing /tmp/al-agent consumed by the
// package install with no declared edge is exactly one MOR.
bool criterion2(std::string* line) {
  std::string why;
  AnalyzeResult r;
  if (!analyze_pair("generate_use.strace", "generate_use_catalog.json", &r, &why)) {
    *line = why;
    return false;
  }
  if (r.report.faults.size() != 1 || r.report.faults[0].kind != "MOR") {
    *line = "expected exactly one MOR, got " + r.report.to_text();
    return false;
  }
  const Fault& f = r.report.faults[0];
  if (!same_pair(f, "Exec[download]", "Package[al-agent]") ||
      f.paths != std::vector<std::string>{"/tmp/al-agent"}) {
    *line = "wrong blocks or witness: " + r.report.to_text();
    return false;
  }
  *line = "one MOR between Exec[download] and Package[al-agent]";
  return true;
}

// 3. Hand-computed state transitions for every interpreter construct.
bool criterion3(std::string* line) {
  std::map<std::string, int> per_construct;
  size_t failures = 0;
  std::string first_failure;
  for (const testsupport::ConstructCase& c : testsupport::construct_cases()) {
    per_construct[c.construct]++;
    std::string why;
    if (!c.run(&why)) {
      failures++;
      if (first_failure.empty())
        first_failure = c.construct + " / " + c.title + ": " + why;
    }
  }
  if (failures) {
    *line = std::to_string(failures) + " case(s) failed; first: " + first_failure;
    return false;
  }
  if (per_construct.size() != 13) {
    *line = "expected 13 constructs, saw " + std::to_string(per_construct.size());
    return false;
  }
  size_t total = 0;
  for (const auto& [name, count] : per_construct) {
    total += count;
    if (count < 3) {
      *line = "construct " + name + " has only " + std::to_string(count) + " cases";
      return false;
    }
  }
  *line = std::to_string(total) + " cases across 13 constructs, all pass";
  return true;
}

// 4. The inode interpreter against a string-replay oracle, and graph
// reachability against a transitive-closure oracle.
bool criterion4(std::string* line) {
  for (uint64_t seed = 1; seed <= 1000; seed++) {
    std::string cwd;
    std::vector<testsupport::TraceStep> steps = testsupport::random_trace(seed, &cwd);
    Diagnostics d;
    Interp interp(d, cwd);
    testsupport::StringReplay replay(cwd);
    for (const testsupport::TraceStep& s : steps) {
      interp.step(s.entry, Block{s.block, 0}, s.op);
      replay.step(s.entry, s.block, s.op);
    }
    if (!(interp.effects() == replay.effects())) {
      *line = "trace seed " + std::to_string(seed) + ": effect maps differ";
      return false;
    }
  }
  for (uint64_t seed = 1; seed <= 500; seed++) {
    testsupport::RandomDag d = testsupport::random_dag(seed);
    auto hb = testsupport::closure(d.label, 1);
    auto nf = testsupport::closure(d.label, 2);
    size_t n = d.names.size();
    for (size_t i = 0; i < n; i++)
      for (size_t j = 0; j < n; j++) {
        if (d.graph.happens_before(d.names[i], d.names[j]) != hb[i][j] ||
            d.graph.notifies(d.names[i], d.names[j]) != nf[i][j]) {
          *line = "dag seed " + std::to_string(seed) + ": " + d.names[i] + " vs " +
                  d.names[j] + " disagrees with the closure";
          return false;
        }
      }
  }
  *line = "1000 replay seeds + 500 closure seeds, zero mismatches";
  return true;
}

// 5. The merging detector against the literal triple loop.
bool criterion5(std::string* line) {
  for (uint64_t seed = 1; seed <= 500; seed++) {
    testsupport::RandomDag d = testsupport::random_dag(seed);
    std::vector<std::string> blocks = d.names;
    blocks.push_back("File[ghost]");
    blocks.push_back("Service[ghost]");
    testsupport::Rng rng(seed * 7919);
    EffectMap m = testsupport::random_effects(rng, blocks);
    DetectorOptions opts;
    opts.expunge_as_produce = (seed % 2) == 0;
    std::set<testsupport::FaultKey> got = testsupport::flatten(Detector(opts).run(m, d.graph));
    std::set<testsupport::FaultKey> want = testsupport::naive_detect(m, d.graph, opts);
    if (got != want) {
      *line = "seed " + std::to_string(seed) + ": detector disagrees with the triple loop (" +
              std::to_string(got.size()) + " vs " + std::to_string(want.size()) + " findings)";
      return false;
    }
  }
  *line = "500 seeds, streamlined == literal scan";
  return true;
}

// 6. Throughput on generated traces: 100 MB under a minute, time linear in
// size (R^2 >= 0.95 over 10..500 MB), memory flat while the input grows.
bool criterion6(std::string* line) {
  char tmpl[] = "/tmp/fsracer_perf_XXXXXX";
  const char* dir = mkdtemp(tmpl);
  if (!dir) {
    *line = "cannot create temp dir";
    return false;
  }
  const std::string trace_path = std::string(dir) + "/perf.strace";
  const std::vector<uint64_t> sizes_mb = {10, 50, 100, 250, 500};
  std::vector<double> xs, ys;
  double secs_100mb = 0;
  long rss_500mb_kb = 0;
  uint64_t bytes_500mb = 0;
  for (uint64_t mb : sizes_mb) {
    GenSpec spec;
    spec.size_bytes = mb * 1024 * 1024;
    spec.blocks = 100;
    spec.paths = 200;
    spec.seed = 1000 + mb;
    GenOutput out;
    {
      std::ofstream trace(trace_path, std::ios::binary);
      try {
        out = generate(spec, trace);
      } catch (const std::exception& e) {
        *line = std::string("generation failed: ") + e.what();
        std::filesystem::remove_all(dir);
        return false;
      }
    }
    uint64_t bytes = std::filesystem::file_size(trace_path);
    Diagnostics dg;
    DepGraph g = DepGraph::from_catalog_json(out.catalog_json, dg);
    std::ifstream in(trace_path, std::ios::binary);
    double t0 = now_seconds();
    AnalyzeResult r = run_analysis(in, g, AnalyzeOptions{});
    double secs = now_seconds() - t0;
    xs.push_back(static_cast<double>(bytes));
    ys.push_back(secs);
    if (mb == 100) secs_100mb = secs;
    if (mb == 500) {
      rss_500mb_kb = r.metrics.max_rss_kb;
      bytes_500mb = bytes;
    }
  }
  std::filesystem::remove_all(dir);

  // least-squares fit of time against size
  size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; i++) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double icept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  for (size_t i = 0; i < n; i++) {
    double fit = icept + slope * xs[i];
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - sy / n) * (ys[i] - sy / n);
  }
  double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;

  if (secs_100mb >= 60.0) {
    *line = "100 MB took " + std::to_string(secs_100mb) + "s";
    return false;
  }
  if (r2 < 0.95) {
    *line = "time is not linear in size: R^2 = " + std::to_string(r2);
    return false;
  }
  if (static_cast<uint64_t>(rss_500mb_kb) * 1024 >= bytes_500mb / 8) {
    *line = "not streaming: " + std::to_string(rss_500mb_kb) + " kB resident for a " +
            std::to_string(bytes_500mb) + " byte trace";
    return false;
  }
  char buf[160];
  snprintf(buf, sizeof buf, "100 MB in %.1fs, R^2 = %.4f over 10..500 MB, %ld MB peak memory",
           secs_100mb, r2, rss_500mb_kb / 1024);
  *line = buf;
  return true;
}

// 7. One fixture per observed fault pattern, each detected exactly.
bool criterion7(std::string* line) {
  struct Case {
    const char* name;
    const char* kind;
  };
  const std::vector<Case> cases = {
      {"generate_use", "MOR"},   {"configure_use", "MOR"}, {"config_file_mn", "MN"},
      {"log_file_mn", "MN"},     {"init_script_mn", "MN"}, {"package_mn", "MN"},
  };
  for (const Case& c : cases) {
    std::string why;
    AnalyzeResult r;
    if (!analyze_pair(std::string(c.name) + ".strace",
                      std::string(c.name) + "_catalog.json", &r, &why)) {
      *line = why;
      return false;
    }
    if (r.report.faults.size() != 1 || r.report.faults[0].kind != c.kind) {
      *line = std::string(c.name) + ": expected exactly one " + c.kind + ", got " +
              (r.report.faults.empty() ? std::string("nothing") : r.report.to_text());
      return false;
    }
  }
  *line = "all six fault-pattern fixtures detected exactly";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  g_fixtures = argc > 1 ? argv[1] : "tests/fixtures";

  struct Criterion {
    const char* label;
    bool (*run)(std::string*);
  };
  const std::vector<Criterion> criteria = {
      {"motivating scenario", criterion1}, {"generate-use pattern", criterion2},
      {"construct rule suite", criterion3}, {"oracle equivalence", criterion4},
      {"detector equivalence", criterion5}, {"performance", criterion6},
      {"fault-pattern fixtures", criterion7},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); i++) {
    std::string line;
    bool ok = criteria[i].run(&line);
    printf("[%s] %zu. %s: %s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].label,
           line.c_str());
    fflush(stdout);
    if (!ok) failures++;
  }
  return failures;
}
