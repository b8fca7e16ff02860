#ifndef PAREVO_CORPUS_HPP
#define PAREVO_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "engine.hpp"
#include "evaluator.hpp"
#include "generator.hpp"
#include "types.hpp"

namespace parevo {

enum class MutationKind { type_mutation, constraint_mutation, algorithmic_mutation };

MutationKind mutation_kind_from_string(std::string_view name);
std::string_view to_string(MutationKind kind);

struct InstructionRecord {
    std::string instruction;
    std::string target_code;
    std::string unit_test;
    std::string seed_id;
    std::vector<std::string> mutation_chain;
    std::string generator_id;
    bool verified = false;
};

struct CriticRejection {
    std::string stage;   // "build" or "tests"
    std::string detail;
};

struct PerfPair {
    std::string task_id;
    std::string base_id;
    std::string opt_id;
    std::string base_code;
    std::string opt_code;
    double base_time_s = 0.0;
    double opt_time_s = 0.0;
    double speedup = 0.0;  // base_time / opt_time
};

struct ComparisonExample {
    std::string instruction;  // fixed pairwise-judgement wording
    std::string code_a;
    std::string code_b;
    std::string label;  // "A" or "B", the faster side
};

extern const char* const kComparisonInstruction;

struct ExecutionLogRecord {
    std::string task_id;
    std::string problem;
    std::string code;
    std::string status;  // pass | fail_compile | fail_test | timeout | infra_error
    std::optional<double> runtime_s;
    std::optional<std::string> error_message;
};

using CorpusRecord = std::variant<InstructionRecord, PerfPair, ComparisonExample, ExecutionLogRecord>;

// Rewrites a seed task through the generator with a kind-specific
// instruction. The generator must answer with DESCRIPTION: and HARNESS:
// sections; anything else throws ParseError (mutation rejected).
TaskSpec mutate_task(const TaskSpec& seed, MutationKind kind, CandidateGenerator& generator, std::uint64_t seed_rng);

// Compile-and-test acceptance gate. Race and profiling stages are skipped;
// a record is emitted iff the candidate builds and passes. Infrastructure
// failures are retried `retries` times, then rethrown.
std::variant<InstructionRecord, CriticRejection> critic_accept(const TaskSpec& task, const std::string& code,
                                                               Evaluator& evaluator, int retries = 1);

// All ordered (earlier, later) pairs of passing timed candidates whose
// speedup base/opt meets the threshold; deduplicated by id pair, identical
// sources excluded.
std::vector<PerfPair> extract_perf_pairs(const Trajectory& trajectory, double threshold = 1.2);

// One example per pair; a seeded fair coin decides whether the faster code
// lands in position A or B. Pairs with tied times are skipped (counted in
// *skipped_ties when given).
std::vector<ComparisonExample> build_comparison_examples(const std::vector<PerfPair>& pairs, std::uint64_t rng_seed,
                                                         std::size_t* skipped_ties = nullptr);

// Drops infrastructure failures and held-out tasks, dedups by (task,
// normalized code) keeping passes over failures, and keeps at most one
// failure per distinct error message per task. Idempotent.
std::vector<ExecutionLogRecord> clean_execution_logs(const std::vector<ExecutionLogRecord>& records,
                                                     const std::set<std::string>& holdout_ids,
                                                     Language lang = Language::other);

nlohmann::ordered_json to_json(const CorpusRecord& record);
CorpusRecord corpus_record_from_json(const nlohmann::json& j);

void serialize_corpus(const std::vector<CorpusRecord>& records, const std::filesystem::path& path);
std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path);

std::set<std::string> load_holdout_ids(const std::filesystem::path& path);

}  // namespace parevo

#endif
