#ifndef PAREVO_EVALUATOR_HPP
#define PAREVO_EVALUATOR_HPP

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "config.hpp"
#include "types.hpp"

namespace parevo {

// The four stages of one evaluation, in pipeline order. run_pipeline owns
// the short-circuit rules so every report, scripted or real, satisfies the
// same gating invariants.
struct PipelineStages {
    std::function<BuildOutcome(std::string& artifact)> build;
    std::function<TestOutcome(const std::string& artifact)> tests;
    std::function<RaceOutcome()> race;
    // nullopt means a repetition crashed or timed out; the report is then
    // downgraded to tests=failed and the clean race verdict is discarded.
    std::function<std::optional<double>()> timing;
    bool race_enabled = true;
    bool timing_enabled = true;
};

EvaluationReport run_pipeline(const std::string& candidate_id, PipelineStages& stages,
                              std::vector<Diagnostic>& diagnostics);

class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual EvaluationReport evaluate(const Candidate& candidate, const TaskSpec& task) = 0;
};

// Drives the task's toolchain through sandboxed subprocesses. Each candidate
// owns work_root/<id>/{src,bin,logs}; the directory is removed afterwards
// unless keep_artifacts is set.
class ToolchainEvaluator : public Evaluator {
public:
    explicit ToolchainEvaluator(EvalConfig config);

    EvaluationReport evaluate(const Candidate& candidate, const TaskSpec& task) override;

    // Individual stages, exposed for targeted tests.
    BuildOutcome compile_candidate(const Candidate& candidate, const TaskSpec& task, bool sanitize,
                                   const std::filesystem::path& scratch, std::string& artifact);
    TestOutcome run_tests(const std::string& artifact, const TaskSpec& task);
    RaceOutcome detect_races(const Candidate& candidate, const TaskSpec& task, const std::filesystem::path& scratch);
    std::optional<double> measure_runtime(const std::string& artifact, const TaskSpec& task);

    const EvalConfig& config() const { return cfg_; }

private:
    std::filesystem::path scratch_for(const Candidate& candidate) const;

    EvalConfig cfg_;
    std::filesystem::path work_root_;
};

// Reads a scripted verdict from directives embedded in the candidate source:
//   // stub: build=failed msg=unknown identifier
//   // stub: tests=passed race=clean time=0.25
//   // stub: times=1:1.0,2:0.52,4:0.31
// Unlisted keys default to a clean pass with time=1.0. `times` maps thread
// count to runtime and takes precedence over `time` for the policy's count.
class StubEvaluator : public Evaluator {
public:
    explicit StubEvaluator(EvalConfig config = {});

    EvaluationReport evaluate(const Candidate& candidate, const TaskSpec& task) override;

private:
    EvalConfig cfg_;
};

struct StubDirective {
    BuildStatus build = BuildStatus::ok;
    TestStatus tests = TestStatus::passed;
    RaceStatus race = RaceStatus::clean;
    double time_s = 1.0;
    std::map<int, double> times_by_thread;
    bool flaky_timing = false;
    std::optional<std::string> infra;
    std::string message;

    double time_for(int threads) const;
};

StubDirective parse_stub_directive(std::string_view source);

std::unique_ptr<Evaluator> make_evaluator(const RunConfig& config);

}  // namespace parevo

#endif
