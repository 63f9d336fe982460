#pragma once

#include <string>
#include <vector>

#include "depgraph.hpp"
#include "interp.hpp"

namespace fsracer {

struct DetectorOptions {
  std::vector<std::string> ignore_prefixes = default_ignores();
  bool expunge_as_produce = true;

  static std::vector<std::string> default_ignores() {
    return {"/proc/", "/sys/", "/dev/", "/run/", "/opt/puppetlabs/", "/var/lib/puppet"};
  }
};

struct Fault {
  std::string kind;      // "MOR" or "MN"
  std::string producer;  // block that wrote
  std::string consumer;  // block that read
  std::vector<std::string> paths;  // sorted, unique
  std::string detail;
};

struct Report {
  std::vector<Fault> faults;
  size_t mor_count = 0;
  size_t mn_count = 0;

  bool has_faults() const { return !faults.empty(); }
  std::string to_text() const;
};

// Checks every path's producers against its consumers: concurrently ordered
// pairs lack an ordering relationship; a produce feeding a service without a
// notification path lacks a notifier.
class Detector {
 public:
  explicit Detector(DetectorOptions opts = {}) : _opts(std::move(opts)) {}

  Report run(const EffectMap& effects, const DepGraph& graph) const;
  bool ignored(const std::string& path) const;

 private:
  DetectorOptions _opts;
};

}  // namespace fsracer
