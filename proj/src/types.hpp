#ifndef PAREVO_TYPES_HPP
#define PAREVO_TYPES_HPP

#include <optional>
#include <string>
#include <vector>

#include "text.hpp"

namespace parevo {

// Argument-vector command templates. Build templates must mention {src} and
// {out}; run templates must mention {bin}.
struct ToolchainPolicy {
    std::vector<std::string> build_command;
    std::vector<std::string> sanitizer_build_command;
    std::vector<std::string> run_command{"{bin}"};
    int thread_count = 1;
    int repetitions = 3;
    double compile_timeout_s = 60.0;
    double run_timeout_s = 10.0;

    void validate() const;
};

struct TestCase {
    std::string id;
    std::string input;
    std::string expected;
};

struct TaskSpec {
    std::string id;
    std::string description;
    std::vector<TestCase> test_cases;
    std::optional<std::string> harness;  // assertion harness appended to the candidate
    ToolchainPolicy toolchain;
    std::optional<std::string> seed_solution;
    std::optional<std::string> sequential_baseline;
    double time_limit_s = 1.0;
    Language language = Language::cxx_parlay;
    std::optional<std::string> timing_input;  // stdin for profiling runs; defaults to the last test case

    void validate() const;
};

enum class Origin { seed, generated, mutated };

std::string_view to_string(Origin origin);
Origin origin_from_string(std::string_view name);

// Identity of a program under evolution: sha256 of the comment-stripped,
// whitespace-collapsed source.
std::string normalize_and_hash(std::string_view source, Language lang);

struct Candidate {
    std::string source;
    std::string id;
    int generation = 0;
    std::vector<std::string> parent_ids;
    Origin origin = Origin::generated;

    static Candidate make(std::string source, Language lang, int generation, std::vector<std::string> parent_ids,
                          Origin origin);
};

enum class BuildStatus { ok, failed };
enum class TestStatus { passed, failed, timed_out, skipped };
enum class RaceStatus { clean, race_detected, deadlock_suspected, skipped };

std::string_view to_string(BuildStatus s);
std::string_view to_string(TestStatus s);
std::string_view to_string(RaceStatus s);

struct BuildOutcome {
    BuildStatus status = BuildStatus::ok;
    std::string log_excerpt;  // compiler log tail when failed
};

struct TestOutcome {
    TestStatus status = TestStatus::skipped;
    std::string first_failed_case;
    std::string detail;
};

struct RaceOutcome {
    RaceStatus status = RaceStatus::skipped;
    std::string report_excerpt;
};

struct Diagnostic {
    std::string label;
    std::string text;
};

// Verdict for one candidate, produced by the evaluation pipeline in fixed
// order: build -> tests -> race -> timing. `infra_error` marks environment
// failures that say nothing about the candidate.
struct EvaluationReport {
    std::string candidate_id;
    BuildOutcome build;
    TestOutcome tests;
    RaceOutcome race;
    std::optional<double> runtime_s;
    std::vector<Diagnostic> diagnostics;
    std::optional<std::string> infra_error;

    bool gating_ok() const;
    void check_gating() const;  // throws PreconditionError with the violated rule
};

}  // namespace parevo

#endif
