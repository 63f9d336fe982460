#include "depgraph.hpp"

#include <stdexcept>

#include <json.hpp>

namespace fsracer {

namespace {

std::string node_name(const nlohmann::json& res) {
  return res.value("type", "") + "[" + res.value("title", "") + "]";
}

std::vector<std::string> ref_list(const nlohmann::json& value) {
  std::vector<std::string> out;
  if (value.is_string()) {
    out.push_back(value.get<std::string>());
  } else if (value.is_array()) {
    for (const auto& v : value)
      if (v.is_string()) out.push_back(v.get<std::string>());
  }
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void DepGraph::add_node(const std::string& name) { _adj[name]; }

void DepGraph::add_edge(const std::string& from, const std::string& to, EdgeLabel label) {
  add_node(from);
  add_node(to);
  auto [it, fresh] = _adj[from].emplace(to, label);
  if (fresh) {
    _edges++;
  } else if (label == EdgeLabel::notify) {
    it->second = EdgeLabel::notify;  // notify subsumes before
  }
  std::lock_guard<std::mutex> lock(_memo->mu);
  _memo->all.clear();
  _memo->notify.clear();
}

std::string DepGraph::type_of(const std::string& name) {
  size_t b = name.find('[');
  return b == std::string::npos ? name : name.substr(0, b);
}

bool DepGraph::is_service(const std::string& name) { return type_of(name) == "Service"; }

const std::unordered_set<std::string>& DepGraph::reach(const std::string& from,
                                                       bool notify_only) const {
  auto& memo = notify_only ? _memo->notify : _memo->all;
  auto it = memo.find(from);
  if (it != memo.end()) return it->second;

  std::unordered_set<std::string> seen;
  std::vector<const std::string*> stack;
  auto push_succ = [&](const std::string& node) {
    auto adj = _adj.find(node);
    if (adj == _adj.end()) return;
    for (const auto& [next, label] : adj->second) {
      if (notify_only && label != EdgeLabel::notify) continue;
      if (seen.insert(next).second) stack.push_back(&next);
    }
  };
  push_succ(from);
  while (!stack.empty()) {
    const std::string* node = stack.back();
    stack.pop_back();
    push_succ(*node);
  }
  return memo.emplace(from, std::move(seen)).first->second;
}

bool DepGraph::happens_before(const std::string& a, const std::string& b) const {
  std::lock_guard<std::mutex> lock(_memo->mu);
  return reach(a, false).count(b) != 0;
}

bool DepGraph::notifies(const std::string& a, const std::string& b) const {
  std::lock_guard<std::mutex> lock(_memo->mu);
  return reach(a, true).count(b) != 0;
}

void DepGraph::check_acyclic() const {
  enum class Color : uint8_t { white, gray, black };
  std::unordered_map<std::string, Color> color;
  std::vector<std::string> path;

  struct Frame {
    const std::string* node;
    std::map<std::string, EdgeLabel>::const_iterator next;
  };

  for (const auto& [start, _] : _adj) {
    if (color.count(start)) continue;
    std::vector<Frame> stack;
    color[start] = Color::gray;
    path.push_back(start);
    stack.push_back({&start, _adj.at(start).begin()});
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& succ = _adj.at(*f.node);
      if (f.next == succ.end()) {
        color[*f.node] = Color::black;
        path.pop_back();
        stack.pop_back();
        continue;
      }
      const std::string& to = f.next->first;
      ++f.next;
      auto c = color.find(to);
      if (c == color.end() || c->second == Color::white) {
        color[to] = Color::gray;
        path.push_back(to);
        const std::string& key = _adj.find(to)->first;
        stack.push_back({&key, _adj.at(to).begin()});
      } else if (c->second == Color::gray) {
        std::string msg = "dependency cycle: ";
        size_t at = 0;
        while (at < path.size() && path[at] != to) at++;
        for (size_t i = at; i < path.size(); i++) msg += path[i] + " -> ";
        msg += to;
        throw std::runtime_error(msg);
      }
    }
  }
}

DepGraph DepGraph::from_catalog_json(const std::string& text, Diagnostics& diag,
                                     bool containment_edges) {
  nlohmann::json doc = nlohmann::json::parse(text);
  if (doc.contains("data") && doc["data"].is_object()) doc = doc["data"];
  if (!doc.contains("resources") || !doc["resources"].is_array())
    throw std::runtime_error("catalog: missing resources array");

  DepGraph g;
  for (const auto& res : doc["resources"]) {
    if (!res.is_object()) continue;
    g.add_node(node_name(res));
  }

  auto edge_to = [&](const std::string& from, const std::string& to, EdgeLabel label) {
    if (!g.has_node(from) || !g.has_node(to)) {
      diag.note("dangling dependency reference: " + from + " -> " + to);
      return;
    }
    g.add_edge(from, to, label);
  };

  for (const auto& res : doc["resources"]) {
    if (!res.is_object() || !res.contains("parameters")) continue;
    const auto& params = res["parameters"];
    if (!params.is_object()) continue;
    std::string self = node_name(res);
    for (const std::string& dep : ref_list(params.value("require", nlohmann::json())))
      edge_to(dep, self, EdgeLabel::before);
    for (const std::string& dep : ref_list(params.value("subscribe", nlohmann::json())))
      edge_to(dep, self, EdgeLabel::notify);
    for (const std::string& dep : ref_list(params.value("before", nlohmann::json())))
      edge_to(self, dep, EdgeLabel::before);
    for (const std::string& dep : ref_list(params.value("notify", nlohmann::json())))
      edge_to(self, dep, EdgeLabel::notify);
  }

  if (containment_edges && doc.contains("edges") && doc["edges"].is_array()) {
    for (const auto& e : doc["edges"]) {
      if (!e.is_object()) continue;
      std::string from = e.value("source", "");
      std::string to = e.value("target", "");
      if (from.empty() || to.empty()) continue;
      edge_to(from, to, EdgeLabel::before);
    }
  }

  g.check_acyclic();
  return g;
}

std::vector<std::string> DepGraph::nodes() const {
  std::vector<std::string> out;
  out.reserve(_adj.size());
  for (const auto& [name, _] : _adj) out.push_back(name);
  return out;
}

std::string DepGraph::dot() const {
  std::string out = "digraph deps {\n";
  for (const auto& [from, succ] : _adj) {
    if (succ.empty()) {
      out += "  " + quote(from) + ";\n";
      continue;
    }
    for (const auto& [to, label] : succ) {
      out += "  " + quote(from) + " -> " + quote(to) +
             (label == EdgeLabel::notify ? " [label=notify];\n" : " [label=before];\n");
    }
  }
  out += "}\n";
  return out;
}

}  // namespace fsracer
