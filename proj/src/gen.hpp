#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace fsracer {

// Deterministic synthetic workload: an strace-format trace with evaluation
// markers, a matching catalog, and the exact fault list the detector must
// report on them.
struct GenSpec {
  uint64_t size_bytes = 1024;  // approximate target for the trace text
  uint32_t blocks = 2;
  uint32_t paths = 1;
  uint64_t seed = 0;

  struct Fault {
    bool mn = false;     // false: missing ordering, true: missing notifier
    uint32_t producer;   // 1-based block number
    uint32_t consumer;
  };
  std::vector<Fault> faults;
};

struct GenOutput {
  std::string catalog_json;
  std::string ground_truth_json;
};

// Writes the trace text to `trace`; returns catalog and ground truth.
// Throws std::invalid_argument on an inconsistent spec.
GenOutput generate(const GenSpec& spec, std::ostream& trace);

// 1-based block number -> resource name used in markers and the catalog.
std::string gen_block_name(const GenSpec& spec, uint32_t block);

}  // namespace fsracer
