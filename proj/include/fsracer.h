/* fsracer - file-system race analysis over recorded system-call traces.
 *
 * All functions are thread-compatible: distinct handles may be used from
 * distinct threads; a single handle must not be shared without locking.
 * Functions returning char* transfer ownership; release with
 * fsr_string_free. On failure, fsr_last_error() describes the problem for
 * the calling thread.
 */
#ifndef FSRACER_H
#define FSRACER_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fsr_status {
  FSR_OK = 0,
  FSR_ERROR = 1,   /* generic failure, see fsr_last_error */
  FSR_EINVAL = 2,  /* bad argument */
  FSR_EIO = 3,     /* file unreadable/unwritable */
  FSR_EPARSE = 4,  /* malformed trace, catalog, or rule file */
  FSR_ECYCLE = 5   /* dependency graph has a cycle */
} fsr_status;

typedef struct fsr_options fsr_options;
typedef struct fsr_graph fsr_graph;
typedef struct fsr_analysis fsr_analysis;

const char* fsr_version(void);
/* Last error message of the calling thread; never NULL. */
const char* fsr_last_error(void);
void fsr_string_free(char* s);

/* ---- options ---------------------------------------------------------- */

fsr_options* fsr_options_new(void);
void fsr_options_free(fsr_options* o);
/* Initial working directory for path resolution (default "/"). */
fsr_status fsr_options_set_cwd(fsr_options* o, const char* cwd);
/* "puppet" (default) or "null". */
fsr_status fsr_options_set_tagger(fsr_options* o, const char* tagger);
/* Append one ignore prefix; paths starting with it never report faults. */
fsr_status fsr_options_add_ignore(fsr_options* o, const char* prefix);
/* Drop the built-in ignore prefixes. */
fsr_status fsr_options_clear_ignores(fsr_options* o);
/* Treat expunged effects as productions for fault pairing (default on). */
fsr_status fsr_options_set_expunge_as_produce(fsr_options* o, int on);
/* Honor catalog containment edges as ordering edges (default on). */
fsr_status fsr_options_set_containment_edges(fsr_options* o, int on);
/* JSON overrides for the syscall mapping table. */
fsr_status fsr_options_set_rules_json(fsr_options* o, const char* json_text);

/* ---- dependency graph ------------------------------------------------- */

/* Load a compiled catalog; path "-" reads stdin. NULL on error. */
fsr_graph* fsr_graph_load_file(const char* path, const fsr_options* o);
fsr_graph* fsr_graph_load_json(const char* text, const fsr_options* o);
void fsr_graph_free(fsr_graph* g);
char* fsr_graph_dot(const fsr_graph* g);
int fsr_graph_happens_before(const fsr_graph* g, const char* a, const char* b);
int fsr_graph_notifies(const fsr_graph* g, const char* a, const char* b);
size_t fsr_graph_node_count(const fsr_graph* g);
size_t fsr_graph_edge_count(const fsr_graph* g);

/* ---- analysis --------------------------------------------------------- */

/* Run the full pipeline on a recorded trace; path "-" reads stdin.
 * NULL on error. */
fsr_analysis* fsr_analyze_file(const char* trace_path, const fsr_graph* g,
                               const fsr_options* o);
void fsr_analysis_free(fsr_analysis* a);

size_t fsr_analysis_fault_count(const fsr_analysis* a);
/* Accessors return NULL if i is out of range. Strings live as long as a. */
const char* fsr_analysis_fault_kind(const fsr_analysis* a, size_t i);
const char* fsr_analysis_fault_producer(const fsr_analysis* a, size_t i);
const char* fsr_analysis_fault_consumer(const fsr_analysis* a, size_t i);
const char* fsr_analysis_fault_detail(const fsr_analysis* a, size_t i);
size_t fsr_analysis_fault_path_count(const fsr_analysis* a, size_t i);
const char* fsr_analysis_fault_path(const fsr_analysis* a, size_t i, size_t j);

char* fsr_analysis_report_text(const fsr_analysis* a);
char* fsr_analysis_report_json(const fsr_analysis* a);
char* fsr_analysis_effects_json(const fsr_analysis* a);
char* fsr_analysis_summary(const fsr_analysis* a);

int fsr_analysis_empty_trace(const fsr_analysis* a);
int fsr_analysis_zero_blocks(const fsr_analysis* a);
/* Named counters: "lines", "entries", "blocks", "paths", "trace_bytes",
 * "skipped_lines", "merged_fragments", "dropped_resumed", "truncated_paths",
 * "tagger_warnings", "interp_errors", "inodes", "effects", "graph_nodes",
 * "graph_edges", "max_rss_kb", "parse_ms", "detect_ms".
 * Unknown names return 0. */
uint64_t fsr_analysis_metric(const fsr_analysis* a, const char* name);

/* ---- synthetic workload generator ------------------------------------- */

/* Writes trace.strace, catalog.json, ground_truth.json into out_dir.
 * faults is NULL/"" or a ';'-separated list of "mor:A,B" / "mn:A,B" with
 * 1-based block numbers. */
fsr_status fsr_generate(uint64_t size_bytes, uint32_t blocks, uint32_t paths,
                        uint64_t seed, const char* faults, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* FSRACER_H */
