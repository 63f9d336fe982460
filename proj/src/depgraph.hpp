#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "diagnostics.hpp"

namespace fsracer {

enum class EdgeLabel : uint8_t { before, notify };

// Declared ordering relationships between task blocks. Edges carry one of
// two labels; a notify edge also orders, so plain reachability uses both
// while notification reachability uses notify edges only. Duplicate edges
// collapse, notify winning.
class DepGraph {
 public:
  static DepGraph from_catalog_json(const std::string& text, Diagnostics& diag,
                                    bool containment_edges = true);

  void add_node(const std::string& name);
  void add_edge(const std::string& from, const std::string& to, EdgeLabel label);

  // Rejects the graph if any dependency cycle exists; the error names one.
  void check_acyclic() const;

  bool has_node(const std::string& name) const { return _adj.count(name) != 0; }
  // strict ordering: a node never happens-before itself
  bool happens_before(const std::string& a, const std::string& b) const;
  // reachability restricted to notify edges
  bool notifies(const std::string& a, const std::string& b) const;
  static bool is_service(const std::string& name);
  static std::string type_of(const std::string& name);

  size_t node_count() const { return _adj.size(); }
  size_t edge_count() const { return _edges; }
  std::vector<std::string> nodes() const;
  std::string dot() const;

 private:
  struct Memo {
    std::mutex mu;
    std::unordered_map<std::string, std::unordered_set<std::string>> all;
    std::unordered_map<std::string, std::unordered_set<std::string>> notify;
  };

  const std::unordered_set<std::string>& reach(const std::string& from, bool notify_only) const;

  std::map<std::string, std::map<std::string, EdgeLabel>> _adj;
  size_t _edges = 0;
  mutable std::unique_ptr<Memo> _memo = std::make_unique<Memo>();
};

}  // namespace fsracer
