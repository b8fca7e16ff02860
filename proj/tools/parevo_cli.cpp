// parevo command-line front end. All engine work goes through the C API in
// parevo.h; this binary only parses flags, wires handles together and writes
// the per-command run manifest.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "parevo.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;           // configuration / infrastructure / schema
constexpr int kExitNoValidSolution = 2;

std::string now_iso() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

int fail(const std::string& what) {
    std::cerr << "parevo: " << what;
    const char* detail = parevo_last_error();
    if (detail && *detail) std::cerr << ": " << detail;
    std::cerr << "\n";
    return kExitError;
}

struct ConfigHandle {
    parevo_config* ptr = nullptr;
    ~ConfigHandle() { parevo_config_free(ptr); }
};
struct TaskHandle {
    parevo_task* ptr = nullptr;
    ~TaskHandle() { parevo_task_close(ptr); }
};
struct GeneratorHandle {
    parevo_generator* ptr = nullptr;
    ~GeneratorHandle() { parevo_generator_close(ptr); }
};

std::string config_value(const parevo_config* cfg, const char* key) {
    char* raw = nullptr;
    if (parevo_config_get(cfg, key, &raw) != PAREVO_OK || !raw) return "";
    std::string out = raw;
    parevo_string_free(raw);
    return out;
}

// "mock:<playlist>" or "endpoint:<url>"; endpoint details come from the
// [generator] config section.
bool open_generator(const std::string& spec, const parevo_config* cfg, GeneratorHandle& out) {
    if (spec.rfind("mock:", 0) == 0)
        return parevo_generator_open_mock(spec.substr(5).c_str(), &out.ptr) == PAREVO_OK;
    if (spec.rfind("endpoint:", 0) == 0) {
        std::string url = spec.substr(9);
        std::string model = config_value(cfg, "generator.model");
        std::string token_env = config_value(cfg, "generator.token_env");
        long timeout_ms = std::stol(config_value(cfg, "generator.timeout_ms"));
        return parevo_generator_open_http(url.c_str(), model.c_str(), token_env.c_str(), timeout_ms, &out.ptr) ==
               PAREVO_OK;
    }
    std::cerr << "parevo: --generator must be mock:<playlist> or endpoint:<url>\n";
    return false;
}

void write_manifest(const fs::path& path, const std::string& run_id, const std::string& command,
                    const nlohmann::ordered_json& config_snapshot, const std::string& started,
                    const std::vector<fs::path>& artifacts) {
    nlohmann::ordered_json manifest;
    manifest["run_id"] = run_id;
    manifest["command"] = command;
    manifest["config"] = config_snapshot;
    manifest["started"] = started;
    manifest["finished"] = now_iso();
    nlohmann::ordered_json paths = nlohmann::ordered_json::array();
    for (const auto& artifact : artifacts)
        if (fs::exists(artifact)) paths.push_back(artifact.string());
    manifest["artifacts"] = paths;
    std::ofstream out(path);
    out << manifest.dump(2) << "\n";
}

std::string reconstruct_command(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parevo: evolutionary search, corpus synthesis and benchmark metrics for parallel programs"};
    app.require_subcommand(1);
    const std::string command_line = reconstruct_command(argc, argv);

    // Shared options.
    std::string config_path;
    std::string generator_spec;
    std::string out_path;
    long long seed = -1;

    // --- evolve ---
    auto* evolve = app.add_subcommand("evolve", "run the evolutionary coding loop on one task");
    std::string task_dir;
    int iterations = -1;
    int jobs = -1;
    bool keep_artifacts = false;
    std::string evaluator_mode;
    evolve->add_option("--task", task_dir, "task directory")->required();
    evolve->add_option("--config", config_path, "run config file (TOML)");
    evolve->add_option("--generator", generator_spec, "mock:<playlist> or endpoint:<url>")->required();
    evolve->add_option("--iterations", iterations, "generations after generation 0");
    evolve->add_option("--seed", seed, "rng seed");
    evolve->add_option("--jobs", jobs, "max concurrent evaluations");
    evolve->add_flag("--keep-artifacts", keep_artifacts, "keep per-candidate scratch directories");
    evolve->add_option("--evaluator", evaluator_mode, "toolchain (default) or stub");
    evolve->add_option("--out", out_path, "run directory (default runs/<task>-<time>-<pid>)");

    // --- synthesize ---
    auto* synthesize = app.add_subcommand("synthesize", "corpus-building pipelines");
    synthesize->require_subcommand(1);

    auto* mutate = synthesize->add_subcommand("mutate", "rewrite a seed task via the generator");
    std::string mutate_kind = "type";
    mutate->add_option("--task", task_dir, "seed task directory")->required();
    mutate->add_option("--kind", mutate_kind, "type | constraint | algorithmic")->required();
    mutate->add_option("--generator", generator_spec, "mock:<playlist> or endpoint:<url>")->required();
    mutate->add_option("--seed", seed, "rng seed");
    mutate->add_option("--config", config_path, "run config file");
    mutate->add_option("--out", out_path, "output task directory")->required();

    auto* critic = synthesize->add_subcommand("critic", "compile-and-test acceptance gate");
    std::vector<std::string> code_paths;
    critic->add_option("--task", task_dir, "task directory")->required();
    critic->add_option("--code", code_paths, "candidate source file(s)")->required();
    critic->add_option("--config", config_path, "run config file");
    critic->add_option("--evaluator", evaluator_mode, "toolchain (default) or stub");
    critic->add_option("--out", out_path, "corpus file to append verified records to")->required();

    auto* pairs = synthesize->add_subcommand("pairs", "slow/fast pairs from a trajectory");
    std::string in_path;
    double threshold = 1.2;
    pairs->add_option("--in", in_path, "trajectory.jsonl")->required();
    pairs->add_option("--threshold", threshold, "minimum speedup (default 1.2)");
    pairs->add_option("--out", out_path, "pairs corpus file")->required();

    auto* compare = synthesize->add_subcommand("compare", "positionally debiased comparison examples");
    compare->add_option("--in", in_path, "pairs corpus file")->required();
    compare->add_option("--seed", seed, "coin seed")->required();
    compare->add_option("--out", out_path, "comparison corpus file")->required();

    auto* clean = synthesize->add_subcommand("clean", "clean execution logs into a training corpus");
    std::string holdout_path;
    clean->add_option("--in", in_path, "execution-log corpus file")->required();
    clean->add_option("--holdout", holdout_path, "held-out task ids, one per line");
    clean->add_option("--out", out_path, "cleaned corpus file")->required();

    // --- bench ---
    auto* bench = app.add_subcommand("bench", "Build@1 / Pass@1 / Speedup@1 over a task suite");
    std::string suite_dir;
    int samples = 0;
    std::string threads_csv;
    std::string format = "csv";
    bench->add_option("--suite", suite_dir, "directory of task directories")->required();
    bench->add_option("--samples", samples, "max samples per task (0 = all)");
    bench->add_option("--threads", threads_csv, "scaling sweep thread counts, e.g. 1,2,4");
    bench->add_option("--config", config_path, "run config file");
    bench->add_option("--evaluator", evaluator_mode, "toolchain (default) or stub");
    bench->add_option("--out", out_path, "report file")->required();
    bench->add_option("--format", format, "table-text | csv | json");

    // --- report ---
    auto* report = app.add_subcommand("report", "re-render a persisted run directory");
    std::string run_dir_arg;
    report->add_option("--run", run_dir_arg, "run directory")->required();
    report->add_option("--out", out_path, "write the rendered report here");

    CLI11_PARSE(app, argc, argv);

    const std::string started = now_iso();

    ConfigHandle cfg;
    if (!config_path.empty()) {
        if (parevo_config_load(config_path.c_str(), &cfg.ptr) != PAREVO_OK) return fail("loading config");
    } else if (parevo_config_create(&cfg.ptr) != PAREVO_OK) {
        return fail("creating config");
    }
    if (seed >= 0) parevo_config_set(cfg.ptr, "evolve.rng_seed", std::to_string(seed).c_str());
    if (!evaluator_mode.empty() && parevo_config_set(cfg.ptr, "evaluation.mode", evaluator_mode.c_str()) != PAREVO_OK)
        return fail("setting evaluator mode");

    if (evolve->parsed()) {
        if (iterations >= 0)
            parevo_config_set(cfg.ptr, "evolve.iterations", std::to_string(iterations).c_str());
        if (jobs > 0) parevo_config_set(cfg.ptr, "evaluation.jobs", std::to_string(jobs).c_str());
        if (keep_artifacts) parevo_config_set(cfg.ptr, "evaluation.keep_artifacts", "true");

        TaskHandle task;
        if (parevo_task_open(task_dir.c_str(), &task.ptr) != PAREVO_OK) return fail("opening task");
        GeneratorHandle generator;
        if (!open_generator(generator_spec, cfg.ptr, generator)) return kExitError;

        std::string run_id = std::string(parevo_task_id(task.ptr)) + "-" +
                             std::to_string(std::chrono::seconds(std::time(nullptr)).count()) + "-" +
                             std::to_string(getpid());
        fs::path run_dir = out_path.empty() ? fs::path("runs") / run_id : fs::path(out_path);

        parevo_run_result* result = nullptr;
        parevo_status status = parevo_evolve(task.ptr, generator.ptr, cfg.ptr, run_dir.c_str(), &result);
        if (status != PAREVO_OK) return fail("evolve run");

        int has_best = parevo_result_has_best(result);
        if (has_best) {
            char* id = nullptr;
            parevo_result_best_id(result, &id);
            std::cout << "best candidate " << (id ? id : "?") << " fitness "
                      << parevo_result_best_fitness(result) << "\n";
            parevo_string_free(id);
            double speedup = 0;
            if (parevo_result_iteration_speedup(result, &speedup) == PAREVO_OK)
                std::cout << "iteration speedup over first valid solution: " << speedup << "\n";
        } else {
            std::cout << "no valid solution found\n";
        }
        parevo_result_free(result);

        write_manifest(run_dir / "manifest.json", run_id, command_line,
                       nlohmann::ordered_json{{"config_file", config_path},
                                              {"task", task_dir},
                                              {"generator", generator_spec},
                                              {"seed", seed},
                                              {"iterations", iterations}},
                       started,
                       {run_dir / "config.snapshot", run_dir / "events.jsonl", run_dir / "trajectory.jsonl",
                        run_dir / "archive.snapshot", run_dir / "best.src"});
        std::cout << "run directory: " << run_dir.string() << "\n";
        return has_best ? kExitOk : kExitNoValidSolution;
    }

    if (mutate->parsed()) {
        GeneratorHandle generator;
        if (!open_generator(generator_spec, cfg.ptr, generator)) return kExitError;
        if (parevo_corpus_mutate(task_dir.c_str(), mutate_kind.c_str(), generator.ptr,
                                 seed < 0 ? 0 : static_cast<unsigned long long>(seed),
                                 out_path.c_str()) != PAREVO_OK)
            return fail("mutate");
        write_manifest(fs::path(out_path) / "manifest.json", "mutate-" + mutate_kind, command_line,
                       {{"task", task_dir}, {"kind", mutate_kind}, {"seed", seed}}, started,
                       {fs::path(out_path) / "task.toml", fs::path(out_path) / "problem.md"});
        std::cout << "mutated task written to " << out_path << "\n";
        return kExitOk;
    }

    if (critic->parsed()) {
        size_t accepted = 0;
        for (const auto& code : code_paths) {
            int verified = 0;
            if (parevo_corpus_critic(task_dir.c_str(), code.c_str(), cfg.ptr, out_path.c_str(), &verified) !=
                PAREVO_OK)
                return fail("critic on " + code);
            if (verified) {
                ++accepted;
            } else {
                std::cerr << "rejected " << code << " (" << parevo_last_error() << ")\n";
            }
        }
        write_manifest(fs::path(out_path).string() + ".manifest.json", "critic", command_line,
                       {{"task", task_dir}, {"codes", code_paths}}, started, {fs::path(out_path)});
        std::cout << "accepted " << accepted << "/" << code_paths.size() << " into " << out_path << "\n";
        return kExitOk;
    }

    if (pairs->parsed()) {
        size_t count = 0;
        if (parevo_corpus_extract_pairs(in_path.c_str(), threshold, out_path.c_str(), &count) != PAREVO_OK)
            return fail("pairs");
        write_manifest(fs::path(out_path).string() + ".manifest.json", "pairs", command_line,
                       {{"in", in_path}, {"threshold", threshold}}, started, {fs::path(out_path)});
        std::cout << count << " pairs written to " << out_path << "\n";
        return kExitOk;
    }

    if (compare->parsed()) {
        size_t count = 0;
        if (parevo_corpus_build_comparisons(in_path.c_str(), static_cast<unsigned long long>(seed < 0 ? 0 : seed),
                                            out_path.c_str(), &count) != PAREVO_OK)
            return fail("compare");
        write_manifest(fs::path(out_path).string() + ".manifest.json", "compare", command_line,
                       {{"in", in_path}, {"seed", seed}}, started, {fs::path(out_path)});
        std::cout << count << " comparison examples written to " << out_path << "\n";
        return kExitOk;
    }

    if (clean->parsed()) {
        size_t count = 0;
        if (parevo_corpus_clean_logs(in_path.c_str(), holdout_path.empty() ? nullptr : holdout_path.c_str(),
                                     out_path.c_str(), &count) != PAREVO_OK)
            return fail("clean");
        write_manifest(fs::path(out_path).string() + ".manifest.json", "clean", command_line,
                       {{"in", in_path}, {"holdout", holdout_path}}, started, {fs::path(out_path)});
        std::cout << count << " records written to " << out_path << "\n";
        return kExitOk;
    }

    if (bench->parsed()) {
        if (parevo_bench_run(suite_dir.c_str(), samples, threads_csv.empty() ? nullptr : threads_csv.c_str(),
                             cfg.ptr, out_path.c_str(), format.c_str()) != PAREVO_OK)
            return fail("bench");
        std::vector<fs::path> artifacts{fs::path(out_path)};
        if (!threads_csv.empty()) artifacts.push_back(fs::path(out_path + ".scaling.json"));
        write_manifest(fs::path(out_path).string() + ".manifest.json", "bench", command_line,
                       {{"suite", suite_dir}, {"samples", samples}, {"threads", threads_csv}, {"format", format}},
                       started, artifacts);
        std::cout << "report written to " << out_path << "\n";
        return kExitOk;
    }

    if (report->parsed()) {
        char* text = nullptr;
        if (parevo_report_render(run_dir_arg.c_str(), out_path.empty() ? nullptr : out_path.c_str(), &text) !=
            PAREVO_OK)
            return fail("report");
        if (text) {
            std::cout << text;
            parevo_string_free(text);
        }
        return kExitOk;
    }

    return kExitError;
}
