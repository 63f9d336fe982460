#include "gen.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace fsracer {

namespace {

// splitmix64: tiny, seedable, stable across platforms
struct Rng {
  uint64_t state;
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }
};

bool is_mn_consumer(const GenSpec& spec, uint32_t block) {
  for (const auto& f : spec.faults)
    if (f.mn && f.consumer == block) return true;
  return false;
}

void validate(const GenSpec& spec) {
  if (spec.size_bytes == 0) throw std::invalid_argument("size must be positive");
  if (spec.blocks == 0) throw std::invalid_argument("at least one block required");
  for (const auto& f : spec.faults) {
    if (f.producer < 1 || f.producer > spec.blocks || f.consumer < 1 ||
        f.consumer > spec.blocks)
      throw std::invalid_argument("fault references a block outside 1.." +
                                  std::to_string(spec.blocks));
    if (f.producer == f.consumer)
      throw std::invalid_argument("fault producer and consumer must differ");
    if (!f.mn && is_mn_consumer(spec, f.consumer))
      throw std::invalid_argument("block " + std::to_string(f.consumer) +
                                  " cannot consume both fault kinds");
  }
}

class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out) : _out(out) {}

  void line(const std::string& s) {
    _out << s << '\n';
    _bytes += s.size() + 1;
  }
  uint64_t bytes() const { return _bytes; }

 private:
  std::ostream& _out;
  uint64_t _bytes = 0;
};

}  // namespace

std::string gen_block_name(const GenSpec& spec, uint32_t block) {
  if (is_mn_consumer(spec, block)) return "Service[gen" + std::to_string(block) + "]";
  return "File[/gen/b" + std::to_string(block) + "]";
}

GenOutput generate(const GenSpec& spec, std::ostream& trace) {
  validate(spec);
  Rng rng{spec.seed * 0x9e3779b97f4a7c15ull + 0xd1b54a32d192ed03ull};
  TraceWriter w(trace);

  const std::string root = "100";
  uint32_t next_child = 200;

  // block-private path pool; cross-block sharing happens only via faults
  uint32_t pool = std::max<uint32_t>(spec.paths, spec.blocks);
  auto private_path = [&](uint32_t block, uint64_t n) {
    // indices congruent to block-1 mod blocks, all below pool
    uint64_t per_block = (pool - (block - 1) + spec.blocks - 1) / spec.blocks;
    uint64_t idx = (block - 1) + (n % per_block) * spec.blocks;
    return "/gen/d" + std::to_string(idx);
  };

  w.line(root + "   getpid()                          = 100");

  uint64_t per_block_budget = spec.size_bytes / spec.blocks;
  for (uint32_t b = 1; b <= spec.blocks; b++) {
    std::string name = gen_block_name(spec, b);
    std::string resource = "/Stage[main]/Gen/" + name;

    std::string begin = "Info: " + resource + ": Starting to evaluate the resource\\n";
    w.line(root + "   write(1, \"" + begin + "\", " + std::to_string(begin.size() - 1) +
           ") = " + std::to_string(begin.size() - 1));
    uint64_t block_start = w.bytes();

    // injected faults anchored first so tiny budgets still carry them
    for (size_t i = 0; i < spec.faults.size(); i++) {
      const auto& f = spec.faults[i];
      std::string fault_path = "/gen/fault" + std::to_string(i + 1);
      if (f.producer == b) {
        w.line(root + "   open(\"" + fault_path +
               "\", O_WRONLY|O_CREAT|O_TRUNC, 0644) = 7");
        w.line(root + "   write(7, \"x\", 1)                 = 1");
        w.line(root + "   close(7)                          = 0");
      }
      if (f.consumer == b) {
        w.line(root + "   open(\"" + fault_path + "\", O_RDONLY) = 7");
        w.line(root + "   read(7, \"x\", 4096)               = 1");
        w.line(root + "   close(7)                          = 0");
      }
    }

    uint64_t n = 0;
    while (w.bytes() - block_start < per_block_budget) {
      std::string p = private_path(b, rng.next());
      switch (rng.below(8)) {
        case 0:
          w.line(root + "   stat(\"" + p + "\", {st_mode=S_IFREG|0644, st_size=" +
                 std::to_string(rng.below(100000)) + ", ...}) = 0");
          break;
        case 1:
          w.line(root + "   access(\"" + p + "\", R_OK) = 0");
          break;
        case 2:
          w.line(root + "   open(\"" + p + "\", O_WRONLY|O_CREAT, 0644) = 3");
          w.line(root + "   close(3)                          = 0");
          break;
        case 3:
          w.line(root + "   stat(\"/gen/missing" + std::to_string(b) +
                 "\", 0x7ffc51e20a10) = -1 ENOENT (No such file or directory)");
          break;
        case 4:
          w.line(root + "   getpid()                          = 100");
          break;
        case 5: {
          // real kernels recycle pids; a bounded pool models that
          std::string child = std::to_string(next_child);
          next_child = next_child >= 215 ? 200 : next_child + 1;
          w.line(root + "   clone(child_stack=NULL, flags=CLONE_CHILD_CLEARTID|SIGCHLD) = " +
                 child);
          w.line(child + "   open(\"" + p + "\", O_RDONLY) = 4");
          w.line(child + "   close(4)                          = 0");
          w.line(child + "   +++ exited with 0 +++");
          break;
        }
        case 6:
          w.line(root + "   open(\"" + p + "\", O_RDONLY <unfinished ...>");
          w.line(root + "   <... open resumed> )              = 5");
          w.line(root + "   close(5)                          = 0");
          break;
        case 7:
          w.line(root + "   write(2, \"notice line " + std::to_string(rng.below(1000)) +
                 "\\n\", 16) = 16");
          break;
      }
      n++;
      (void)n;
    }

    std::string end = "Info: " + resource + ": Evaluated in 0.0" +
                      std::to_string(1 + rng.below(9)) + " seconds\\n";
    w.line(root + "   write(1, \"" + end + "\", " + std::to_string(end.size() - 1) +
           ") = " + std::to_string(end.size() - 1));
  }
  w.line(root + "   +++ exited with 0 +++");

  // catalog: one resource per block; an MN fault carries a before-edge via
  // require so only the notifier is missing
  nlohmann::json resources = nlohmann::json::array();
  for (uint32_t b = 1; b <= spec.blocks; b++) {
    std::string name = gen_block_name(spec, b);
    size_t open = name.find('[');
    nlohmann::json res = {{"type", name.substr(0, open)},
                          {"title", name.substr(open + 1, name.size() - open - 2)},
                          {"parameters", nlohmann::json::object()}};
    nlohmann::json requires_list = nlohmann::json::array();
    for (const auto& f : spec.faults)
      if (f.mn && f.consumer == b) requires_list.push_back(gen_block_name(spec, f.producer));
    if (!requires_list.empty()) res["parameters"]["require"] = std::move(requires_list);
    resources.push_back(std::move(res));
  }
  nlohmann::json catalog = {{"resources", std::move(resources)},
                            {"edges", nlohmann::json::array()}};

  // expected report, merged and ordered the way the detector orders
  std::map<std::tuple<std::string, std::string, std::string>, std::set<std::string>> merged;
  for (size_t i = 0; i < spec.faults.size(); i++) {
    const auto& f = spec.faults[i];
    merged[{f.mn ? "MN" : "MOR", gen_block_name(spec, f.producer),
            gen_block_name(spec, f.consumer)}]
        .insert("/gen/fault" + std::to_string(i + 1));
  }
  nlohmann::json truth = nlohmann::json::array();
  for (const auto& [key, paths] : merged) {
    const auto& [kind, producer, consumer] = key;
    truth.push_back({{"kind", kind},
                     {"producer", producer},
                     {"consumer", consumer},
                     {"paths", std::vector<std::string>(paths.begin(), paths.end())}});
  }

  GenOutput out;
  out.catalog_json = catalog.dump(2);
  out.ground_truth_json = nlohmann::json{{"faults", std::move(truth)}}.dump(2);
  return out;
}

}  // namespace fsracer
