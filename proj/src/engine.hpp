#ifndef PAREVO_ENGINE_HPP
#define PAREVO_ENGINE_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "archive.hpp"
#include "common.hpp"
#include "config.hpp"
#include "evaluator.hpp"
#include "generator.hpp"
#include "types.hpp"
#include "vendor_json.hpp"

namespace parevo {

struct EmptyGenerationError : Error {
    using Error::Error;
};

struct TrajectoryEntry {
    std::string task_id;
    int generation = 0;
    std::string candidate_id;
    Origin origin = Origin::generated;
    std::vector<std::string> parent_ids;
    std::string build;
    std::string tests;
    std::string race;
    std::optional<double> runtime_s;
    double fitness = 0.0;
    bool infra = false;
    std::string source;
};

struct Trajectory {
    std::vector<TrajectoryEntry> entries;

    // First candidate that passed all tests (race verdict not considered).
    std::optional<std::size_t> first_valid_index() const;
    // First candidate achieving the run's maximum positive fitness.
    std::optional<std::size_t> best_index() const;
};

nlohmann::ordered_json to_json(const TrajectoryEntry& entry);
TrajectoryEntry trajectory_entry_from_json(const nlohmann::json& j);
Trajectory load_trajectory(const std::filesystem::path& path);

// T(first valid) / T(best). Requires a first-valid entry with a recorded
// runtime and a positive-fitness best; throws PreconditionError otherwise.
double iteration_speedup(const Trajectory& trajectory);

struct SurvivorContext {
    const Candidate* candidate = nullptr;
    const EvaluationReport* report = nullptr;
    double fitness = 0.0;
};

// Renders the configured template with the problem statement and one block
// per survivor (source, fitness, runtime, diagnostic excerpts), best first.
// Output is capped at max_prompt_bytes; diagnostics of the weakest blocks
// are dropped first, then whole blocks from the tail.
std::string assemble_prompt(const TaskSpec& task, const std::vector<SurvivorContext>& survivors,
                            const EngineConfig& config);

struct EvolutionResult {
    std::optional<Candidate> best;
    double best_fitness = 0.0;
    bool no_valid_solution = true;
    Trajectory trajectory;
    Archive archive;
};

// Event and trajectory streams of one run. The default sink discards.
class RunSink {
public:
    virtual ~RunSink() = default;
    virtual void event(nlohmann::ordered_json /*e*/) {}
    virtual void trajectory_line(const nlohmann::ordered_json& /*e*/) {}
};

class RunDirSink : public RunSink {
public:
    explicit RunDirSink(const std::filesystem::path& run_dir);
    void event(nlohmann::ordered_json e) override;
    void trajectory_line(const nlohmann::ordered_json& e) override;

private:
    std::ofstream events_;
    std::ofstream trajectory_;
};

struct CandidateRecord {
    Candidate candidate;
    EvaluationReport report;
    double fitness = 0.0;
    FeatureDescriptor descriptor;
};

// One evolutionary run: generation 0 from the seed and/or generator, then
// config.iterations generations of generate -> evaluate -> score -> archive
// -> select. Deterministic given (task, config, scripted generator).
class EvolutionEngine {
public:
    EvolutionEngine(const TaskSpec& task, CandidateGenerator& generator, Evaluator& evaluator, const RunConfig& config,
                    RunSink* sink = nullptr);

    EvolutionResult run();

    // Stepwise interface used by tests.
    void bootstrap();
    void step();
    EvolutionResult finish();

    const Archive& archive() const { return archive_; }
    const Trajectory& trajectory() const { return trajectory_; }
    const std::vector<std::string>& survivors() const { return survivors_; }
    const std::map<std::string, CandidateRecord>& store() const { return store_; }
    std::size_t generator_texts_requested() const { return generator_texts_requested_; }

private:
    std::vector<Candidate> initial_population();
    std::vector<Candidate> dedup_new(std::vector<Candidate> batch);
    void evaluate_generation(std::vector<Candidate> batch, int generation);
    void select(int generation);
    std::vector<SurvivorContext> survivor_contexts() const;
    void emit(nlohmann::ordered_json e);

    const TaskSpec& task_;
    CandidateGenerator& generator_;
    Evaluator& evaluator_;
    RunConfig config_;
    RunSink* sink_;

    Archive archive_;
    Trajectory trajectory_;
    std::map<std::string, CandidateRecord> store_;
    std::vector<std::string> survivors_;
    int generations_done_ = 0;
    std::size_t generator_texts_requested_ = 0;
};

// Full run with artifacts: <run_dir>/{config.snapshot, events.jsonl,
// trajectory.jsonl, archive.snapshot, best.src}.
EvolutionResult run_evolution_to_dir(const TaskSpec& task, CandidateGenerator& generator, Evaluator& evaluator,
                                     const RunConfig& config, const std::filesystem::path& run_dir);

}  // namespace parevo

#endif
