#include "detector.hpp"

#include <map>
#include <set>
#include <tuple>

namespace fsracer {

bool Detector::ignored(const std::string& path) const {
  for (const std::string& prefix : _opts.ignore_prefixes)
    if (path.rfind(prefix, 0) == 0) return true;
  return false;
}

Report Detector::run(const EffectMap& effects, const DepGraph& graph) const {
  // (kind, producer, consumer) -> paths; tuple order doubles as report order
  std::map<std::tuple<std::string, std::string, std::string>, std::set<std::string>> found;

  for (const auto& [path, items] : effects) {
    if (ignored(path)) continue;
    std::set<std::string> consumers;
    std::set<std::string> producers;
    for (const EffItem& it : items) {
      if (it.block.empty()) continue;  // out-of-block activity never reports
      switch (it.effect) {
        case Effect::consumed:
          consumers.insert(it.block);
          break;
        case Effect::produced:
          producers.insert(it.block);
          break;
        case Effect::expunged:
          if (_opts.expunge_as_produce) producers.insert(it.block);
          break;
      }
    }
    if (producers.empty() || consumers.empty()) continue;
    for (const std::string& b1 : producers) {
      for (const std::string& b2 : consumers) {
        if (b1 == b2) continue;
        if (!graph.happens_before(b1, b2) && !graph.happens_before(b2, b1))
          found[{"MOR", b1, b2}].insert(path);
        if (DepGraph::is_service(b2) && !graph.notifies(b1, b2))
          found[{"MN", b1, b2}].insert(path);
      }
    }
  }

  Report report;
  for (const auto& [key, paths] : found) {
    const auto& [kind, producer, consumer] = key;
    Fault f;
    f.kind = kind;
    f.producer = producer;
    f.consumer = consumer;
    f.paths.assign(paths.begin(), paths.end());

    std::vector<std::string> notes;
    if (!graph.has_node(producer)) notes.push_back("block not in dependency graph: " + producer);
    if (!graph.has_node(consumer)) notes.push_back("block not in dependency graph: " + consumer);
    const char* other = kind == "MOR" ? "MN" : "MOR";
    if (found.count({other, producer, consumer}))
      notes.push_back(std::string("pair also reported as ") + other);
    for (size_t i = 0; i < notes.size(); i++) {
      if (i) f.detail += "; ";
      f.detail += notes[i];
    }

    if (kind == "MOR")
      report.mor_count++;
    else
      report.mn_count++;
    report.faults.push_back(std::move(f));
  }
  return report;
}

std::string Report::to_text() const {
  std::string out;
  for (const Fault& f : faults) {
    out += f.kind + ": " + f.producer;
    out += f.kind == "MOR" ? " <-> " : " -> ";
    out += f.consumer + "\n";
    out += "    paths:";
    for (const std::string& p : f.paths) out += " " + p;
    out += "\n";
    if (!f.detail.empty()) out += "    note: " + f.detail + "\n";
  }
  out += "faults: " + std::to_string(faults.size()) + " (" + std::to_string(mor_count) +
         " missing ordering, " + std::to_string(mn_count) + " missing notifier)\n";
  return out;
}

}  // namespace fsracer
