#include "types.hpp"

#include <algorithm>

#include "common.hpp"
#include "sha256.hpp"

namespace parevo {

namespace {

bool mentions(const std::vector<std::string>& argv, std::string_view placeholder) {
    return std::any_of(argv.begin(), argv.end(),
                       [&](const std::string& a) { return a.find(placeholder) != std::string::npos; });
}

}  // namespace

void ToolchainPolicy::validate() const {
    if (build_command.empty()) throw ConfigError("toolchain: build_command is empty");
    if (!mentions(build_command, "{src}") || !mentions(build_command, "{out}"))
        throw ConfigError("toolchain: build_command must contain {src} and {out}");
    if (!sanitizer_build_command.empty() &&
        (!mentions(sanitizer_build_command, "{src}") || !mentions(sanitizer_build_command, "{out}")))
        throw ConfigError("toolchain: sanitizer_build_command must contain {src} and {out}");
    if (run_command.empty() || !mentions(run_command, "{bin}"))
        throw ConfigError("toolchain: run_command must contain {bin}");
    if (thread_count < 1) throw ConfigError("toolchain: thread_count must be >= 1");
    if (repetitions < 1) throw ConfigError("toolchain: repetitions must be >= 1");
    if (compile_timeout_s <= 0 || run_timeout_s <= 0) throw ConfigError("toolchain: timeouts must be > 0");
}

void TaskSpec::validate() const {
    if (id.empty()) throw ConfigError("task: id is empty");
    if (test_cases.empty() && !harness) throw ConfigError("task '" + id + "': needs test cases or a harness");
    if (time_limit_s <= 0) throw ConfigError("task '" + id + "': time_limit must be > 0");
    toolchain.validate();
}

std::string_view to_string(Origin origin) {
    switch (origin) {
        case Origin::seed: return "seed";
        case Origin::generated: return "generated";
        case Origin::mutated: return "mutated";
    }
    return "generated";
}

Origin origin_from_string(std::string_view name) {
    if (name == "seed") return Origin::seed;
    if (name == "generated") return Origin::generated;
    if (name == "mutated") return Origin::mutated;
    throw ParseError("unknown origin: '" + std::string(name) + "'");
}

std::string normalize_and_hash(std::string_view source, Language lang) {
    return sha256_hex(normalize_source(source, lang));
}

Candidate Candidate::make(std::string source, Language lang, int generation, std::vector<std::string> parent_ids,
                          Origin origin) {
    Candidate c;
    c.id = normalize_and_hash(source, lang);
    c.source = std::move(source);
    c.generation = generation;
    c.parent_ids = std::move(parent_ids);
    c.origin = origin;
    return c;
}

std::string_view to_string(BuildStatus s) { return s == BuildStatus::ok ? "ok" : "failed"; }

std::string_view to_string(TestStatus s) {
    switch (s) {
        case TestStatus::passed: return "passed";
        case TestStatus::failed: return "failed";
        case TestStatus::timed_out: return "timed_out";
        case TestStatus::skipped: return "skipped";
    }
    return "skipped";
}

std::string_view to_string(RaceStatus s) {
    switch (s) {
        case RaceStatus::clean: return "clean";
        case RaceStatus::race_detected: return "race_detected";
        case RaceStatus::deadlock_suspected: return "deadlock_suspected";
        case RaceStatus::skipped: return "skipped";
    }
    return "skipped";
}

bool EvaluationReport::gating_ok() const {
    if (tests.status != TestStatus::skipped && build.status != BuildStatus::ok) return false;
    if (race.status != RaceStatus::skipped && tests.status != TestStatus::passed) return false;
    if (runtime_s && race.status != RaceStatus::clean) return false;
    if (runtime_s && *runtime_s <= 0) return false;
    return true;
}

void EvaluationReport::check_gating() const {
    if (tests.status != TestStatus::skipped && build.status != BuildStatus::ok)
        throw PreconditionError("report: tests ran without a successful build");
    if (race.status != RaceStatus::skipped && tests.status != TestStatus::passed)
        throw PreconditionError("report: race stage ran without passing tests");
    if (runtime_s && race.status != RaceStatus::clean)
        throw PreconditionError("report: runtime recorded without a clean race verdict");
    if (runtime_s && *runtime_s <= 0) throw PreconditionError("report: runtime must be positive");
}

}  // namespace parevo
