#include "parevo.h"

#include <cstdlib>
#include <cstring>
#include <sstream>

#include "common.hpp"
#include "corpus.hpp"
#include "engine.hpp"
#include "evaluator.hpp"
#include "generator.hpp"
#include "metrics.hpp"
#include "task_io.hpp"

using namespace parevo;

struct parevo_task {
    TaskSpec spec;
};
struct parevo_config {
    RunConfig cfg;
};
struct parevo_generator {
    std::unique_ptr<CandidateGenerator> gen;
};
struct parevo_run_result {
    EvolutionResult result;
};

namespace {

thread_local std::string g_last_error;

parevo_status fail(parevo_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

// Maps the library's exception taxonomy onto status codes.
template <typename Fn>
parevo_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        return fail(PAREVO_ERR_CONFIG, e.what());
    } catch (const ParseError& e) {
        return fail(PAREVO_ERR_PARSE, e.what());
    } catch (const IoError& e) {
        return fail(PAREVO_ERR_IO, e.what());
    } catch (const InfraError& e) {
        return fail(PAREVO_ERR_INFRA, e.what());
    } catch (const EmptyGenerationError& e) {
        return fail(PAREVO_ERR_INFRA, e.what());
    } catch (const PreconditionError& e) {
        return fail(PAREVO_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(PAREVO_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PAREVO_ERR_INTERNAL, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::vector<int> parse_threads_csv(const char* csv) {
    std::vector<int> out;
    if (!csv || !*csv) return out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    return out;
}

}  // namespace

extern "C" {

const char* parevo_version(void) { return "0.1.0"; }

const char* parevo_last_error(void) { return g_last_error.c_str(); }

void parevo_string_free(char* s) { std::free(s); }

parevo_status parevo_task_open(const char* dir, parevo_task** out) {
    if (!dir || !out) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto task = std::make_unique<parevo_task>();
        task->spec = load_task(dir);
        *out = task.release();
        return PAREVO_OK;
    });
}

void parevo_task_close(parevo_task* task) { delete task; }

const char* parevo_task_id(const parevo_task* task) { return task ? task->spec.id.c_str() : ""; }

parevo_status parevo_config_create(parevo_config** out) {
    if (!out) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new parevo_config{RunConfig::defaults()};
        return PAREVO_OK;
    });
}

parevo_status parevo_config_load(const char* path, parevo_config** out) {
    if (!path || !out) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new parevo_config{RunConfig::load(path)};
        return PAREVO_OK;
    });
}

parevo_status parevo_config_set(parevo_config* config, const char* key, const char* value) {
    if (!config || !key || !value) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        config->cfg.set(key, value);
        return PAREVO_OK;
    });
}

parevo_status parevo_config_get(const parevo_config* config, const char* key, char** out_value) {
    if (!config || !key || !out_value) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out_value = dup_string(config->cfg.get(key));
        return PAREVO_OK;
    });
}

void parevo_config_free(parevo_config* config) { delete config; }

parevo_status parevo_generator_open_mock(const char* playlist_path, parevo_generator** out) {
    if (!playlist_path || !out) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new parevo_generator{std::make_unique<PlaylistGenerator>(playlist_path)};
        return PAREVO_OK;
    });
}

parevo_status parevo_generator_open_http(const char* base_url, const char* model, const char* token_env,
                                         long timeout_ms, parevo_generator** out) {
    if (!base_url || !out) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        GeneratorConfig gc;
        gc.base_url = base_url;
        if (model && *model) gc.model = model;
        gc.token_env = token_env ? token_env : "";
        if (timeout_ms > 0) gc.timeout_ms = timeout_ms;
        *out = new parevo_generator{std::make_unique<HttpGenerator>(gc)};
        return PAREVO_OK;
    });
}

parevo_status parevo_generator_open_callback(parevo_generate_fn fn, void* user_data, parevo_generator** out) {
    if (!fn || !out) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto wrapped = [fn, user_data](const std::string& prompt, std::size_t n,
                                       std::uint64_t seed) -> std::vector<std::string> {
            std::vector<std::string> texts;
            for (std::size_t i = 0; i < n; ++i) {
                char* s = fn(prompt.c_str(), n, i, seed, user_data);
                if (!s) continue;
                texts.emplace_back(s);
                std::free(s);
            }
            return texts;
        };
        *out = new parevo_generator{std::make_unique<FunctionGenerator>(wrapped, "callback")};
        return PAREVO_OK;
    });
}

void parevo_generator_close(parevo_generator* generator) { delete generator; }

parevo_status parevo_evolve(const parevo_task* task, parevo_generator* generator, const parevo_config* config,
                            const char* run_dir, parevo_run_result** out) {
    if (!task || !generator || !config || !run_dir || !out)
        return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        RunConfig cfg = config->cfg;
        // Scratch defaults into the run directory so a run is self-contained
        // and --keep-artifacts leaves everything in one place.
        if (cfg.eval.work_root.empty())
            cfg.eval.work_root = (std::filesystem::path(run_dir) / "work").string();
        auto evaluator = make_evaluator(cfg);
        auto result = std::make_unique<parevo_run_result>();
        result->result = run_evolution_to_dir(task->spec, *generator->gen, *evaluator, cfg, run_dir);
        std::error_code ec;
        if (std::filesystem::is_empty(cfg.eval.work_root, ec) && !ec)
            std::filesystem::remove(cfg.eval.work_root, ec);
        *out = result.release();
        return PAREVO_OK;
    });
}

int parevo_result_has_best(const parevo_run_result* result) {
    return result && result->result.best ? 1 : 0;
}

parevo_status parevo_result_best_source(const parevo_run_result* result, char** out_source) {
    if (!result || !out_source) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    if (!result->result.best) return fail(PAREVO_ERR_INVALID_ARGUMENT, "run produced no valid solution");
    *out_source = dup_string(result->result.best->source);
    return PAREVO_OK;
}

parevo_status parevo_result_best_id(const parevo_run_result* result, char** out_id) {
    if (!result || !out_id) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    if (!result->result.best) return fail(PAREVO_ERR_INVALID_ARGUMENT, "run produced no valid solution");
    *out_id = dup_string(result->result.best->id);
    return PAREVO_OK;
}

double parevo_result_best_fitness(const parevo_run_result* result) {
    return result ? result->result.best_fitness : 0.0;
}

parevo_status parevo_result_iteration_speedup(const parevo_run_result* result, double* out) {
    if (!result || !out) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = iteration_speedup(result->result.trajectory);
        return PAREVO_OK;
    });
}

void parevo_result_free(parevo_run_result* result) { delete result; }

parevo_status parevo_corpus_extract_pairs(const char* trajectory_path, double threshold, const char* out_path,
                                          size_t* out_count) {
    if (!trajectory_path || !out_path) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        Trajectory trajectory = load_trajectory(trajectory_path);
        auto pairs = extract_perf_pairs(trajectory, threshold);
        std::vector<CorpusRecord> records(pairs.begin(), pairs.end());
        serialize_corpus(records, out_path);
        if (out_count) *out_count = pairs.size();
        return PAREVO_OK;
    });
}

parevo_status parevo_corpus_build_comparisons(const char* pairs_path, unsigned long long seed, const char* out_path,
                                              size_t* out_count) {
    if (!pairs_path || !out_path) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::vector<PerfPair> pairs;
        for (auto& record : read_corpus(pairs_path)) {
            if (auto* pair = std::get_if<PerfPair>(&record)) pairs.push_back(std::move(*pair));
        }
        auto examples = build_comparison_examples(pairs, seed);
        std::vector<CorpusRecord> records(examples.begin(), examples.end());
        serialize_corpus(records, out_path);
        if (out_count) *out_count = examples.size();
        return PAREVO_OK;
    });
}

parevo_status parevo_corpus_clean_logs(const char* logs_path, const char* holdout_path, const char* out_path,
                                       size_t* out_count) {
    if (!logs_path || !out_path) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::vector<ExecutionLogRecord> logs;
        for (auto& record : read_corpus(logs_path)) {
            if (auto* log = std::get_if<ExecutionLogRecord>(&record)) logs.push_back(std::move(*log));
        }
        std::set<std::string> holdout;
        if (holdout_path && *holdout_path) holdout = load_holdout_ids(holdout_path);
        auto cleaned = clean_execution_logs(logs, holdout);
        std::vector<CorpusRecord> records(cleaned.begin(), cleaned.end());
        serialize_corpus(records, out_path);
        if (out_count) *out_count = cleaned.size();
        return PAREVO_OK;
    });
}

parevo_status parevo_corpus_critic(const char* task_dir, const char* code_path, const parevo_config* config,
                                   const char* out_path, int* out_verified) {
    if (!task_dir || !code_path || !config || !out_path)
        return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        TaskSpec task = load_task(task_dir);
        std::string code = read_file(code_path);
        RunConfig cfg = config->cfg;
        cfg.eval.run_race_stage = false;
        cfg.eval.run_timing_stage = false;
        auto evaluator = make_evaluator(cfg);
        auto verdict = critic_accept(task, code, *evaluator, cfg.eval.critic_retries);
        if (auto* record = std::get_if<InstructionRecord>(&verdict)) {
            std::string line = to_json(CorpusRecord(*record)).dump() + "\n";
            std::ofstream out(out_path, std::ios::app);
            if (!out) throw IoError(std::string("cannot append to ") + out_path);
            out << line;
            if (out_verified) *out_verified = 1;
        } else {
            auto& rejection = std::get<CriticRejection>(verdict);
            g_last_error = "rejected at stage " + rejection.stage + ": " + rejection.detail;
            if (out_verified) *out_verified = 0;
        }
        return PAREVO_OK;
    });
}

parevo_status parevo_corpus_mutate(const char* task_dir, const char* kind, parevo_generator* generator,
                                   unsigned long long seed, const char* out_task_dir) {
    if (!task_dir || !kind || !generator || !out_task_dir)
        return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        TaskSpec task = load_task(task_dir);
        TaskSpec mutated = mutate_task(task, mutation_kind_from_string(kind), *generator->gen, seed);
        write_task(out_task_dir, mutated);
        return PAREVO_OK;
    });
}

parevo_status parevo_bench_run(const char* suite_dir, int samples_per_task, const char* threads_csv,
                               const parevo_config* config, const char* out_path, const char* format) {
    if (!suite_dir || !config || !out_path || !format)
        return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::vector<int> threads = parse_threads_csv(threads_csv);
        BenchResult bench = run_bench(suite_dir, samples_per_task, config->cfg, threads);
        emit_report(bench.report, out_path, report_format_from_string(format));
        if (!threads.empty()) {
            nlohmann::ordered_json curves = nlohmann::ordered_json::array();
            for (const auto& curve : bench.curves) {
                nlohmann::ordered_json points = nlohmann::ordered_json::array();
                for (const auto& p : curve.points) points.push_back({{"threads", p.threads}, {"runtime_s", p.runtime_s}});
                curves.push_back({{"task", curve.task_id},
                                  {"partial", curve.partial},
                                  {"points", points},
                                  {"relative_speedups", curve.relative_speedups()}});
            }
            write_file(std::string(out_path) + ".scaling.json", curves.dump(2) + "\n");
        }
        return PAREVO_OK;
    });
}

parevo_status parevo_report_render(const char* run_dir, const char* out_path, char** out_text) {
    if (!run_dir) return fail(PAREVO_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::filesystem::path dir(run_dir);
        Trajectory trajectory = load_trajectory(dir / "trajectory.jsonl");

        std::string text = "run: " + dir.string() + "\n";
        text += "candidates evaluated: " + std::to_string(trajectory.entries.size()) + "\n";
        int generations = 0;
        for (const auto& e : trajectory.entries) generations = std::max(generations, e.generation + 1);
        text += "generations: " + std::to_string(generations) + "\n";
        if (auto first = trajectory.first_valid_index()) {
            const auto& e = trajectory.entries[*first];
            text += "first valid: " + short_id(e.candidate_id) + " (generation " + std::to_string(e.generation) +
                    ")\n";
        } else {
            text += "first valid: none\n";
        }
        if (auto best = trajectory.best_index()) {
            const auto& e = trajectory.entries[*best];
            text += "best: " + short_id(e.candidate_id) + " fitness " + format_double(e.fitness) + " (generation " +
                    std::to_string(e.generation) + ")\n";
            try {
                text += "iteration speedup: " + format_double(iteration_speedup(trajectory)) + "\n";
            } catch (const PreconditionError&) {
                text += "iteration speedup: undefined\n";
            }
        } else {
            text += "best: none (no valid solution)\n";
        }
        if (std::filesystem::exists(dir / "archive.snapshot")) {
            Archive archive = Archive::load(dir / "archive.snapshot");
            text += "archive cells occupied: " + std::to_string(archive.size()) + "\n";
        }

        if (out_path) write_file(out_path, text);
        if (out_text) *out_text = dup_string(text);
        return PAREVO_OK;
    });
}

}  // extern "C"
