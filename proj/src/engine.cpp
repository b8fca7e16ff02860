#include "engine.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include "common.hpp"
#include "fitness.hpp"
#include "sha256.hpp"

namespace parevo {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Trajectory

std::optional<std::size_t> Trajectory::first_valid_index() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i].infra && entries[i].tests == "passed") return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> Trajectory::best_index() const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.infra || e.fitness <= 0.0) continue;
        if (!best || e.fitness > entries[*best].fitness) best = i;
    }
    return best;
}

nlohmann::ordered_json to_json(const TrajectoryEntry& e) {
    nlohmann::ordered_json j;
    j["task_id"] = e.task_id;
    j["generation"] = e.generation;
    j["candidate_id"] = e.candidate_id;
    j["origin"] = std::string(to_string(e.origin));
    j["parent_ids"] = e.parent_ids;
    j["build"] = e.build;
    j["tests"] = e.tests;
    j["race"] = e.race;
    if (e.runtime_s)
        j["runtime_s"] = *e.runtime_s;
    else
        j["runtime_s"] = nullptr;
    j["fitness"] = e.fitness;
    j["infra"] = e.infra;
    j["source"] = e.source;
    return j;
}

TrajectoryEntry trajectory_entry_from_json(const nlohmann::json& j) {
    TrajectoryEntry e;
    e.task_id = j.value("task_id", "");
    e.generation = j.at("generation").get<int>();
    e.candidate_id = j.at("candidate_id").get<std::string>();
    e.origin = origin_from_string(j.value("origin", "generated"));
    e.parent_ids = j.value("parent_ids", std::vector<std::string>{});
    e.build = j.at("build").get<std::string>();
    e.tests = j.at("tests").get<std::string>();
    e.race = j.at("race").get<std::string>();
    if (j.contains("runtime_s") && !j.at("runtime_s").is_null()) e.runtime_s = j.at("runtime_s").get<double>();
    e.fitness = j.at("fitness").get<double>();
    e.infra = j.value("infra", false);
    e.source = j.value("source", "");
    return e;
}

Trajectory load_trajectory(const fs::path& path) {
    Trajectory t;
    std::ifstream in(path);
    if (!in) throw IoError("cannot read trajectory: " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            t.entries.push_back(trajectory_entry_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return t;
}

double iteration_speedup(const Trajectory& trajectory) {
    auto first = trajectory.first_valid_index();
    if (!first) throw PreconditionError("iteration speedup undefined: no candidate ever passed the tests");
    const auto& first_entry = trajectory.entries[*first];
    if (!first_entry.runtime_s)
        throw PreconditionError("iteration speedup undefined: first valid candidate has no recorded runtime");
    auto best = trajectory.best_index();
    if (!best) throw PreconditionError("iteration speedup undefined: no candidate achieved positive fitness");
    const auto& best_entry = trajectory.entries[*best];
    if (!best_entry.runtime_s)
        throw PreconditionError("iteration speedup undefined: best candidate has no recorded runtime");
    if (best_entry.candidate_id == first_entry.candidate_id) return 1.0;
    return *first_entry.runtime_s / *best_entry.runtime_s;
}

// ---------------------------------------------------------------------------
// Prompt assembly

namespace {

std::string render_template(const std::string& tmpl, const std::string& problem, const std::string& blocks) {
    std::string out = tmpl;
    auto replace_all = [&](std::string_view key, const std::string& value) {
        std::size_t at = 0;
        while ((at = out.find(key, at)) != std::string::npos) {
            out.replace(at, key.size(), value);
            at += value.size();
        }
    };
    replace_all("{problem_description}", problem);
    replace_all("{survivor_blocks}", blocks);
    return out;
}

struct RenderedBlock {
    std::string core;
    std::string diagnostics;
};

RenderedBlock render_block(const SurvivorContext& s) {
    const Candidate& c = *s.candidate;
    const EvaluationReport& r = *s.report;
    RenderedBlock block;
    block.core = "\n--- prior candidate " + short_id(c.id) + " (generation " + std::to_string(c.generation) +
                 ") ---\n";
    block.core += "fitness: " + format_double(s.fitness);
    if (r.runtime_s) block.core += ", runtime: " + format_double(*r.runtime_s) + "s";
    block.core += "\nstatus: build=" + std::string(to_string(r.build.status)) +
                  " tests=" + std::string(to_string(r.tests.status)) + " race=" + std::string(to_string(r.race.status)) +
                  "\n";
    block.core += c.source;
    if (!block.core.empty() && block.core.back() != '\n') block.core += '\n';
    if (!r.diagnostics.empty()) {
        block.diagnostics = "diagnostics:\n";
        for (const auto& d : r.diagnostics) block.diagnostics += "[" + d.label + "] " + d.text + "\n";
    }
    return block;
}

}  // namespace

std::string assemble_prompt(const TaskSpec& task, const std::vector<SurvivorContext>& survivors,
                            const EngineConfig& config) {
    std::vector<SurvivorContext> ordered = survivors;
    std::sort(ordered.begin(), ordered.end(), [](const SurvivorContext& a, const SurvivorContext& b) {
        if (a.fitness != b.fitness) return a.fitness > b.fitness;
        if (a.candidate->generation != b.candidate->generation)
            return a.candidate->generation > b.candidate->generation;
        return a.candidate->id < b.candidate->id;
    });

    std::vector<RenderedBlock> blocks;
    blocks.reserve(ordered.size());
    for (const auto& s : ordered) blocks.push_back(render_block(s));

    const std::string header =
        blocks.empty() ? std::string() : std::string("\nPRIOR CANDIDATES, best first, with tool feedback:\n");

    auto compose = [&](std::size_t n_blocks, std::size_t n_with_diags) {
        std::string section;
        if (n_blocks > 0) section = header;
        for (std::size_t i = 0; i < n_blocks; ++i) {
            section += blocks[i].core;
            if (i < n_with_diags) section += blocks[i].diagnostics;
        }
        return render_template(config.prompt_template, task.description, section);
    };

    std::size_t n_blocks = blocks.size();
    std::size_t n_with_diags = blocks.size();
    std::string prompt = compose(n_blocks, n_with_diags);
    // Weakest diagnostics go first, then whole trailing blocks.
    while (prompt.size() > config.max_prompt_bytes && n_with_diags > 0) {
        --n_with_diags;
        prompt = compose(n_blocks, n_with_diags);
    }
    while (prompt.size() > config.max_prompt_bytes && n_blocks > 1) {
        --n_blocks;
        prompt = compose(n_blocks, n_with_diags);
    }
    if (prompt.size() > config.max_prompt_bytes) prompt.resize(config.max_prompt_bytes);
    return prompt;
}

// ---------------------------------------------------------------------------
// RunDirSink

RunDirSink::RunDirSink(const fs::path& run_dir) {
    fs::create_directories(run_dir);
    events_.open(run_dir / "events.jsonl", std::ios::trunc);
    trajectory_.open(run_dir / "trajectory.jsonl", std::ios::trunc);
    if (!events_ || !trajectory_) throw IoError("cannot open run streams under " + run_dir.string());
}

void RunDirSink::event(nlohmann::ordered_json e) {
    e["ts"] = iso8601_now();
    events_ << e.dump() << '\n';
    events_.flush();
}

void RunDirSink::trajectory_line(const nlohmann::ordered_json& e) {
    trajectory_ << e.dump() << '\n';
    trajectory_.flush();
}

// ---------------------------------------------------------------------------
// EvolutionEngine

EvolutionEngine::EvolutionEngine(const TaskSpec& task, CandidateGenerator& generator, Evaluator& evaluator,
                                 const RunConfig& config, RunSink* sink)
    : task_(task),
      generator_(generator),
      evaluator_(evaluator),
      config_(config),
      sink_(sink),
      archive_(config.features) {
    task_.validate();
    config_.engine.validate();
}

void EvolutionEngine::emit(nlohmann::ordered_json e) {
    if (sink_) sink_->event(std::move(e));
}

std::vector<Candidate> EvolutionEngine::initial_population() {
    const EngineConfig& ec = config_.engine;
    std::vector<Candidate> out;
    if (task_.seed_solution) out.push_back(Candidate::make(*task_.seed_solution, task_.language, 0, {}, Origin::seed));

    std::size_t want = static_cast<std::size_t>(ec.population_per_generation);
    if (out.size() < want) {
        std::string prompt = assemble_prompt(task_, {}, ec);
        emit({{"event", "prompt"}, {"generation", 0}, {"bytes", prompt.size()}, {"text", prompt}});
        std::size_t ask = want - out.size();
        generator_texts_requested_ += ask;
        auto texts = generator_.generate(prompt, ask, mix_seed(ec.rng_seed, 0, 1));
        nlohmann::ordered_json digests = nlohmann::ordered_json::array();
        for (const auto& text : texts) digests.push_back(sha256_hex(text));
        emit({{"event", "response"}, {"generation", 0}, {"count", texts.size()}, {"digests", digests}});
        for (auto& text : texts)
            out.push_back(Candidate::make(std::move(text), task_.language, 0, {}, Origin::generated));
    }
    if (out.empty())
        throw EmptyGenerationError("generation 0 is empty: no seed solution and the generator produced nothing");
    return out;
}

std::vector<Candidate> EvolutionEngine::dedup_new(std::vector<Candidate> batch) {
    std::vector<Candidate> fresh;
    std::set<std::string> in_batch;
    for (auto& c : batch) {
        if (store_.count(c.id) || in_batch.count(c.id)) {
            emit({{"event", "duplicate"}, {"candidate_id", c.id}, {"generation", c.generation}});
            continue;
        }
        in_batch.insert(c.id);
        fresh.push_back(std::move(c));
    }
    return fresh;
}

void EvolutionEngine::evaluate_generation(std::vector<Candidate> batch, int generation) {
    std::vector<EvaluationReport> reports(batch.size());
    int jobs = std::max(1, config_.eval.jobs);
    if (jobs == 1 || batch.size() <= 1) {
        for (std::size_t i = 0; i < batch.size(); ++i) reports[i] = evaluator_.evaluate(batch[i], task_);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (;;) {
                        std::size_t i = next.fetch_add(1);
                        if (i >= batch.size()) return;
                        reports[i] = evaluator_.evaluate(batch[i], task_);
                    }
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : workers) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // Scoring, archive insertion and trajectory appends stay sequential and
    // ordered, which keeps runs reproducible regardless of jobs.
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Candidate& cand = batch[i];
        EvaluationReport& report = reports[i];

        TrajectoryEntry entry;
        entry.task_id = task_.id;
        entry.generation = generation;
        entry.candidate_id = cand.id;
        entry.origin = cand.origin;
        entry.parent_ids = cand.parent_ids;
        entry.build = std::string(to_string(report.build.status));
        entry.tests = std::string(to_string(report.tests.status));
        entry.race = std::string(to_string(report.race.status));
        entry.runtime_s = report.runtime_s;
        entry.source = cand.source;

        if (report.infra_error) {
            entry.infra = true;
            entry.fitness = 0.0;
            emit({{"event", "infra_error"}, {"candidate_id", cand.id}, {"detail", *report.infra_error}});
        } else {
            entry.fitness = compute_fitness(report, config_.engine.epsilon_s);
        }

        emit({{"event", "report"},
              {"candidate_id", cand.id},
              {"generation", generation},
              {"build", entry.build},
              {"tests", entry.tests},
              {"race", entry.race},
              {"runtime_s", report.runtime_s ? nlohmann::ordered_json(*report.runtime_s)
                                             : nlohmann::ordered_json(nullptr)},
              {"fitness", entry.fitness},
              {"infra", entry.infra}});

        if (!entry.infra) {
            FeatureDescriptor desc = extract_features(cand.source, task_.language, config_.features);
            InsertResult ins = archive_.insert(desc, cand.id, entry.fitness, generation);
            emit({{"event", "archive_insert"},
                  {"candidate_id", cand.id},
                  {"cell", {desc.length_bin, desc.complexity_bin, desc.sync_bin}},
                  {"accepted", ins == InsertResult::accepted}});
            store_[cand.id] = {cand, report, entry.fitness, desc};
        }

        if (sink_) sink_->trajectory_line(to_json(entry));
        trajectory_.entries.push_back(std::move(entry));
    }
}

void EvolutionEngine::select(int generation) {
    std::vector<PopulationEntry> pool;
    // Previous survivors stay in the pool, so a barren generation keeps the
    // context stable instead of wiping it.
    std::set<std::string> seen;
    for (const auto& id : survivors_) {
        if (auto it = store_.find(id); it != store_.end() && seen.insert(id).second)
            pool.push_back({id, it->second.fitness, it->second.candidate.generation, it->second.descriptor});
    }
    for (const auto& e : trajectory_.entries) {
        if (e.generation != generation || e.infra) continue;
        if (auto it = store_.find(e.candidate_id); it != store_.end() && seen.insert(e.candidate_id).second)
            pool.push_back(
                {e.candidate_id, it->second.fitness, it->second.candidate.generation, it->second.descriptor});
    }
    survivors_ = select_survivors(pool, archive_, config_.engine.top_k, config_.engine.diverse_d,
                                  mix_seed(config_.engine.rng_seed, static_cast<std::uint64_t>(generation), 2));
    emit({{"event", "selection"}, {"generation", generation}, {"survivors", survivors_}});
}

std::vector<SurvivorContext> EvolutionEngine::survivor_contexts() const {
    std::vector<SurvivorContext> out;
    for (const auto& id : survivors_) {
        auto it = store_.find(id);
        if (it == store_.end()) continue;
        out.push_back({&it->second.candidate, &it->second.report, it->second.fitness});
    }
    return out;
}

void EvolutionEngine::bootstrap() {
    emit({{"event", "run_start"}, {"task_id", task_.id}, {"generator", generator_.id()}});
    std::vector<Candidate> gen0 = dedup_new(initial_population());
    if (gen0.empty())
        throw EmptyGenerationError("generation 0 collapsed to zero distinct candidates");
    evaluate_generation(std::move(gen0), 0);
    select(0);
    generations_done_ = 0;
}

void EvolutionEngine::step() {
    int generation = ++generations_done_;
    std::string prompt = assemble_prompt(task_, survivor_contexts(), config_.engine);
    emit({{"event", "prompt"}, {"generation", generation}, {"bytes", prompt.size()}, {"text", prompt}});

    std::size_t ask = static_cast<std::size_t>(config_.engine.population_per_generation);
    generator_texts_requested_ += ask;
    auto texts = generator_.generate(prompt, ask,
                                     mix_seed(config_.engine.rng_seed, static_cast<std::uint64_t>(generation), 1));
    nlohmann::ordered_json digests = nlohmann::ordered_json::array();
    for (const auto& text : texts) digests.push_back(sha256_hex(text));
    emit({{"event", "response"}, {"generation", generation}, {"count", texts.size()}, {"digests", digests}});

    std::vector<Candidate> batch;
    for (auto& text : texts)
        batch.push_back(Candidate::make(std::move(text), task_.language, generation, survivors_, Origin::mutated));
    batch = dedup_new(std::move(batch));

    if (batch.empty()) {
        // Prior survivors are retained untouched; re-sampling the diverse
        // picks here would churn the context for no new information.
        emit({{"event", "generation_skipped"},
              {"generation", generation},
              {"reason", texts.empty() ? "generator produced nothing" : "all candidates were duplicates"}});
        return;
    }
    evaluate_generation(std::move(batch), generation);
    select(generation);
}

EvolutionResult EvolutionEngine::finish() {
    EvolutionResult result;
    result.trajectory = trajectory_;
    result.archive = archive_;
    auto best = trajectory_.best_index();
    if (best) {
        const auto& entry = trajectory_.entries[*best];
        result.best_fitness = entry.fitness;
        result.no_valid_solution = false;
        auto it = store_.find(entry.candidate_id);
        if (it != store_.end()) result.best = it->second.candidate;
    }
    emit({{"event", "run_end"},
          {"best_id", result.best ? nlohmann::ordered_json(result.best->id) : nlohmann::ordered_json(nullptr)},
          {"best_fitness", result.best_fitness},
          {"no_valid_solution", result.no_valid_solution}});
    return result;
}

EvolutionResult EvolutionEngine::run() {
    bootstrap();
    for (int i = 0; i < config_.engine.iterations; ++i) step();
    return finish();
}

EvolutionResult run_evolution_to_dir(const TaskSpec& task, CandidateGenerator& generator, Evaluator& evaluator,
                                     const RunConfig& config, const fs::path& run_dir) {
    fs::create_directories(run_dir);
    write_file(run_dir / "config.snapshot", config.snapshot().dump(2) + "\n");
    RunDirSink sink(run_dir);
    EvolutionEngine engine(task, generator, evaluator, config, &sink);
    EvolutionResult result;
    try {
        result = engine.run();
    } catch (const std::exception& e) {
        sink.event({{"event", "error"}, {"detail", e.what()}});
        throw;
    }
    result.archive.save(run_dir / "archive.snapshot");
    if (result.best) write_file(run_dir / "best.src", result.best->source);
    return result;
}

}  // namespace parevo
