/*
 * parevo — evolutionary search engine for parallel programs, with the
 * companion corpus-synthesis pipelines and benchmark metrics.
 *
 * C API of the shared library. All objects are opaque handles; functions
 * return parevo_status and leave a human-readable message retrievable via
 * parevo_last_error() (thread-local). Strings returned through char** are
 * heap-allocated; release them with parevo_string_free().
 */
#ifndef PAREVO_H
#define PAREVO_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum parevo_status {
    PAREVO_OK = 0,
    PAREVO_ERR_INVALID_ARGUMENT = 1,
    PAREVO_ERR_IO = 2,
    PAREVO_ERR_CONFIG = 3,
    PAREVO_ERR_PARSE = 4,
    PAREVO_ERR_INFRA = 5,
    PAREVO_ERR_INTERNAL = 6
} parevo_status;

typedef struct parevo_task parevo_task;
typedef struct parevo_config parevo_config;
typedef struct parevo_generator parevo_generator;
typedef struct parevo_run_result parevo_run_result;

const char* parevo_version(void);

/* Message for the most recent failing call on this thread. */
const char* parevo_last_error(void);

void parevo_string_free(char* s);

/* ------------------------------------------------------------------ tasks */

/* Opens a task directory (problem.md, task.toml, tests/, optional seed.src,
 * baseline_seq.src, harness.src, timing.in). */
parevo_status parevo_task_open(const char* dir, parevo_task** out);
void parevo_task_close(parevo_task* task);
const char* parevo_task_id(const parevo_task* task);

/* ----------------------------------------------------------------- config */

parevo_status parevo_config_create(parevo_config** out);
parevo_status parevo_config_load(const char* path, parevo_config** out);
/* Dotted keys, e.g. "evolve.iterations", "evaluation.mode". */
parevo_status parevo_config_set(parevo_config* config, const char* key, const char* value);
parevo_status parevo_config_get(const parevo_config* config, const char* key, char** out_value);
void parevo_config_free(parevo_config* config);

/* ------------------------------------------------------------- generators */

/* Scripted mock reading a playlist JSON file: {"0": ["a.src", ...], ...};
 * one entry is consumed per generator call. */
parevo_status parevo_generator_open_mock(const char* playlist_path, parevo_generator** out);

/* Chat-completions endpoint adapter. token_env names the environment
 * variable holding the bearer token (may be NULL or empty). */
parevo_status parevo_generator_open_http(const char* base_url, const char* model, const char* token_env,
                                         long timeout_ms, parevo_generator** out);

/* Embedding hook: called once per requested candidate; return a malloc'd
 * source (ownership transfers) or NULL to produce fewer candidates. */
typedef char* (*parevo_generate_fn)(const char* prompt, size_t n_requested, size_t index,
                                    unsigned long long seed, void* user_data);
parevo_status parevo_generator_open_callback(parevo_generate_fn fn, void* user_data, parevo_generator** out);

void parevo_generator_close(parevo_generator* generator);

/* ----------------------------------------------------------------- evolve */

/* Runs the full evolutionary loop and populates run_dir with
 * config.snapshot, events.jsonl, trajectory.jsonl, archive.snapshot and
 * best.src (when a valid solution exists). A run with no valid solution is
 * still PAREVO_OK; inspect parevo_result_has_best. */
parevo_status parevo_evolve(const parevo_task* task, parevo_generator* generator, const parevo_config* config,
                            const char* run_dir, parevo_run_result** out);

int parevo_result_has_best(const parevo_run_result* result);
parevo_status parevo_result_best_source(const parevo_run_result* result, char** out_source);
parevo_status parevo_result_best_id(const parevo_run_result* result, char** out_id);
double parevo_result_best_fitness(const parevo_run_result* result);
/* Speedup of the best candidate over the first test-passing one. */
parevo_status parevo_result_iteration_speedup(const parevo_run_result* result, double* out);
void parevo_result_free(parevo_run_result* result);

/* ----------------------------------------------------------------- corpus */

/* trajectory.jsonl -> slow/fast pairs at the given speedup threshold. */
parevo_status parevo_corpus_extract_pairs(const char* trajectory_path, double threshold, const char* out_path,
                                          size_t* out_count);

/* pairs file -> positionally debiased comparison examples. */
parevo_status parevo_corpus_build_comparisons(const char* pairs_path, unsigned long long seed, const char* out_path,
                                              size_t* out_count);

/* execution-log records -> cleaned corpus (infra failures dropped, holdout
 * removed, deduplicated, one failure per distinct error message). holdout
 * path may be NULL. */
parevo_status parevo_corpus_clean_logs(const char* logs_path, const char* holdout_path, const char* out_path,
                                       size_t* out_count);

/* Compile-and-test gate for one (task, code) pair. On acceptance appends a
 * verified record line to out_path and sets *out_verified = 1; on rejection
 * sets it to 0 and returns PAREVO_OK. */
parevo_status parevo_corpus_critic(const char* task_dir, const char* code_path, const parevo_config* config,
                                   const char* out_path, int* out_verified);

/* Mutates a seed task (kind: "type" | "constraint" | "algorithmic") through
 * the generator and writes the new task directory. */
parevo_status parevo_corpus_mutate(const char* task_dir, const char* kind, parevo_generator* generator,
                                   unsigned long long seed, const char* out_task_dir);

/* ------------------------------------------------------------------ bench */

/* Evaluates the sources under suite_dir/<task>/samples and writes Build@1,
 * Pass@1 and Speedup@1 rows plus the expected-speedup summary. format:
 * "table-text", "csv" or "json". threads_csv (e.g. "1,2,4") is optional;
 * when present a scaling sweep also writes <out_path>.scaling.json. */
parevo_status parevo_bench_run(const char* suite_dir, int samples_per_task, const char* threads_csv,
                               const parevo_config* config, const char* out_path, const char* format);

/* ----------------------------------------------------------------- report */

/* Re-renders a persisted run directory; writes to out_path when non-NULL,
 * otherwise returns the rendered text. */
parevo_status parevo_report_render(const char* run_dir, const char* out_path, char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* PAREVO_H */
