#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "common.hpp"
#include "evaluator.hpp"
#include "task_io.hpp"
#include "test_util.hpp"

using namespace parevo;

namespace {

Candidate cand(const std::string& source) {
    return Candidate::make(source, Language::cxx_parlay, 0, {}, Origin::generated);
}

Candidate cand_file(const std::string& fixture_rel) {
    return cand(test_util::slurp(test_util::fixture(fixture_rel)));
}

EvalConfig eval_config(const test_util::TempDir& dir) {
    EvalConfig cfg;
    cfg.work_root = (dir / "work").string();
    return cfg;
}

}  // namespace

TEST_CASE("compile outcomes") {
    test_util::TempDir dir("compile");
    ToolchainEvaluator ev(eval_config(dir));
    TaskSpec task = load_task(test_util::fixture("tasks/echo"));
    std::string artifact;

    SUBCASE("well-formed program builds") {
        BuildOutcome out = ev.compile_candidate(cand_file("sources/hello.cpp"), task, false, dir / "s1", artifact);
        CHECK(out.status == BuildStatus::ok);
        CHECK(std::filesystem::exists(artifact));
    }
    SUBCASE("missing semicolon fails with the compiler's error line") {
        BuildOutcome out =
            ev.compile_candidate(cand_file("sources/missing_semicolon.cpp"), task, false, dir / "s2", artifact);
        CHECK(out.status == BuildStatus::failed);
        CHECK(out.log_excerpt.find("error") != std::string::npos);
    }
    SUBCASE("hallucinated function fails at link time") {
        BuildOutcome out =
            ev.compile_candidate(cand_file("sources/undefined_function.cpp"), task, false, dir / "s3", artifact);
        CHECK(out.status == BuildStatus::failed);
        CHECK(out.log_excerpt.find("parlay_convex_hull") != std::string::npos);
    }
    SUBCASE("compile timeout carries a marker") {
        TaskSpec slow = task;
        slow.toolchain.compile_timeout_s = 0.02;
        BuildOutcome out = ev.compile_candidate(cand_file("sources/hello.cpp"), slow, false, dir / "s4", artifact);
        CHECK(out.status == BuildStatus::failed);
        CHECK(out.log_excerpt.find("compile timeout") != std::string::npos);
    }
    SUBCASE("missing toolchain is an infrastructure error, not a verdict") {
        TaskSpec broken = task;
        broken.toolchain.build_command = {"not-a-compiler-xyz-2026", "{src}", "-o", "{out}"};
        CHECK_THROWS_AS(ev.compile_candidate(cand_file("sources/hello.cpp"), broken, false, dir / "s5", artifact),
                        InfraError);
    }
}

TEST_CASE("unit-test outcomes") {
    test_util::TempDir dir("tests");
    ToolchainEvaluator ev(eval_config(dir));
    TaskSpec task = load_task(test_util::fixture("tasks/echo"));
    std::string artifact;
    REQUIRE(ev.compile_candidate(cand_file("sources/echo.cpp"), task, false, dir / "echo", artifact).status ==
            BuildStatus::ok);

    SUBCASE("identity program passes both cases") {
        TestOutcome out = ev.run_tests(artifact, task);
        CHECK(out.status == TestStatus::passed);
    }
    SUBCASE("first mismatching case is named") {
        TaskSpec forced = task;
        forced.test_cases[0].expected = "6\n";
        TestOutcome out = ev.run_tests(artifact, forced);
        CHECK(out.status == TestStatus::failed);
        CHECK(out.first_failed_case == "00");
        CHECK(out.detail.find("expected '6'") != std::string::npos);
    }
    SUBCASE("timeout classification") {
        std::string bin;
        REQUIRE(ev.compile_candidate(cand_file("sources/infloop.cpp"), task, false, dir / "loop", bin).status ==
                BuildStatus::ok);
        TaskSpec quick = task;
        quick.time_limit_s = 1.0;
        TestOutcome out = ev.run_tests(bin, quick);
        CHECK(out.status == TestStatus::timed_out);
    }
}

TEST_CASE("harness tasks compile the candidate together with the harness") {
    test_util::TempDir dir("harness");
    ToolchainEvaluator ev(eval_config(dir));
    TaskSpec task = load_task(test_util::fixture("tasks/harness"));

    EvaluationReport good = ev.evaluate(cand_file("sources/harness_ok.cpp"), task);
    CHECK(good.build.status == BuildStatus::ok);
    CHECK(good.tests.status == TestStatus::passed);
    CHECK(good.race.status == RaceStatus::clean);
    REQUIRE(good.runtime_s);
    CHECK(*good.runtime_s > 0);

    EvaluationReport bad = ev.evaluate(cand_file("sources/harness_bad.cpp"), task);
    CHECK(bad.build.status == BuildStatus::ok);
    CHECK(bad.tests.status == TestStatus::failed);
    CHECK(bad.race.status == RaceStatus::skipped);
}

TEST_CASE("race detection") {
    test_util::TempDir dir("race");
    ToolchainEvaluator ev(eval_config(dir));
    TaskSpec task = load_task(test_util::fixture("tasks/racy"));

    SUBCASE("single-threaded program is clean") {
        TaskSpec st = task;
        st.test_cases[0].expected = "done\n";
        RaceOutcome out = ev.detect_races(cand_file("sources/single_thread.cpp"), st, dir / "st");
        CHECK(out.status == RaceStatus::clean);
    }
    SUBCASE("unguarded counter is flagged") {
        RaceOutcome out = ev.detect_races(cand_file("sources/racy.cpp"), task, dir / "racy");
        CHECK(out.status == RaceStatus::race_detected);
        CHECK(out.report_excerpt.find("ThreadSanitizer") != std::string::npos);
    }
    SUBCASE("inverted lock order under timeout reads as a suspected deadlock") {
        TaskSpec dl = task;
        dl.time_limit_s = 0.1;
        dl.toolchain.run_timeout_s = 2.0;  // sanitizer budget
        RaceOutcome out = ev.detect_races(cand_file("sources/deadlock.cpp"), dl, dir / "dl");
        CHECK(out.status == RaceStatus::deadlock_suspected);
    }
    SUBCASE("sanitizer build failure is conservatively a race verdict") {
        TaskSpec broken = task;
        broken.toolchain.sanitizer_build_command = {"g++", "--definitely-bad-flag", "{src}", "-o", "{out}"};
        RaceOutcome out = ev.detect_races(cand_file("sources/single_thread.cpp"), broken, dir / "badsan");
        CHECK(out.status == RaceStatus::race_detected);
        CHECK(out.report_excerpt.find("sanitizer build failed") != std::string::npos);
    }
}

TEST_CASE("runtime measurement") {
    test_util::TempDir dir("timing");
    ToolchainEvaluator ev(eval_config(dir));
    TaskSpec task = load_task(test_util::fixture("tasks/echo"));
    task.test_cases = {{"00", "", "ok\n"}};
    task.toolchain.repetitions = 3;

    std::string artifact;
    REQUIRE(ev.compile_candidate(cand_file("sources/sleep100.cpp"), task, false, dir / "sleep", artifact).status ==
            BuildStatus::ok);
    auto median = ev.measure_runtime(artifact, task);
    REQUIRE(median);
    CHECK(*median >= 0.1);
    CHECK(*median <= 0.15);

    SUBCASE("crashing repetition invalidates the timing") {
        TaskSpec tight = task;
        tight.time_limit_s = 0.02;  // sleep exceeds it
        auto none = ev.measure_runtime(artifact, tight);
        CHECK_FALSE(none);
    }
}

TEST_CASE("full pipeline classification") {
    test_util::TempDir dir("pipeline");
    ToolchainEvaluator ev(eval_config(dir));

    SUBCASE("non-compiling candidate short-circuits") {
        TaskSpec task = load_task(test_util::fixture("tasks/echo"));
        EvaluationReport r = ev.evaluate(cand_file("sources/missing_semicolon.cpp"), task);
        CHECK(r.build.status == BuildStatus::failed);
        CHECK(r.tests.status == TestStatus::skipped);
        CHECK(r.race.status == RaceStatus::skipped);
        CHECK_FALSE(r.runtime_s);
        CHECK(r.gating_ok());
        REQUIRE(!r.diagnostics.empty());
        CHECK(r.diagnostics[0].label == "build");
    }
    SUBCASE("correct but racy candidate passes tests and scores no runtime") {
        TaskSpec task = load_task(test_util::fixture("tasks/racy"));
        EvaluationReport r = ev.evaluate(cand_file("sources/racy.cpp"), task);
        CHECK(r.build.status == BuildStatus::ok);
        CHECK(r.tests.status == TestStatus::passed);
        CHECK(r.race.status == RaceStatus::race_detected);
        CHECK_FALSE(r.runtime_s);
        CHECK(r.gating_ok());
    }
    SUBCASE("clean candidate gets a positive runtime") {
        TaskSpec task = load_task(test_util::fixture("tasks/echo"));
        EvaluationReport r = ev.evaluate(cand_file("sources/echo.cpp"), task);
        CHECK(r.build.status == BuildStatus::ok);
        CHECK(r.tests.status == TestStatus::passed);
        CHECK(r.race.status == RaceStatus::clean);
        REQUIRE(r.runtime_s);
        CHECK(*r.runtime_s > 0);
    }
    SUBCASE("missing toolchain surfaces as an infra report") {
        TaskSpec task = load_task(test_util::fixture("tasks/echo"));
        task.toolchain.build_command = {"not-a-compiler-xyz-2026", "{src}", "-o", "{out}"};
        EvaluationReport r = ev.evaluate(cand_file("sources/hello.cpp"), task);
        REQUIRE(r.infra_error);
        CHECK(r.infra_error->find("toolchain missing") != std::string::npos);
        CHECK(r.build.status == BuildStatus::ok);  // no verdict was reached
        CHECK(r.tests.status == TestStatus::skipped);
    }
}

TEST_CASE("scratch directory hygiene") {
    test_util::TempDir dir("hygiene");
    TaskSpec task = load_task(test_util::fixture("tasks/echo"));

    SUBCASE("kept artifacts live in per-candidate directories") {
        EvalConfig cfg = eval_config(dir);
        cfg.keep_artifacts = true;
        ToolchainEvaluator ev(cfg);
        Candidate a = cand_file("sources/echo.cpp");
        Candidate b = cand_file("sources/hello.cpp");
        ev.evaluate(a, task);
        ev.evaluate(b, task);

        std::vector<std::filesystem::path> dirs;
        for (const auto& entry : std::filesystem::directory_iterator(dir / "work")) dirs.push_back(entry.path());
        REQUIRE(dirs.size() == 2);
        for (const auto& scratch : dirs) {
            std::string name = scratch.filename().string();
            bool owned_by_a = name.find(a.id) == 0;
            bool owned_by_b = name.find(b.id) == 0;
            CHECK((owned_by_a || owned_by_b));
            std::string src = test_util::slurp(scratch / "src" / "main.cpp");
            CHECK(src == (owned_by_a ? a.source : b.source));
        }
    }
    SUBCASE("scratch is removed by default") {
        ToolchainEvaluator ev(eval_config(dir));
        ev.evaluate(cand_file("sources/hello.cpp"), task);
        CHECK((!std::filesystem::exists(dir / "work") || std::filesystem::is_empty(dir / "work")));
    }
}

TEST_CASE("stub evaluator follows its directives") {
    StubEvaluator ev;
    TaskSpec task = load_task(test_util::fixture("tasks/stub"));

    SUBCASE("defaults to a clean pass at time 1.0") {
        EvaluationReport r = ev.evaluate(cand("int main() {}"), task);
        CHECK(r.tests.status == TestStatus::passed);
        CHECK(r.runtime_s == 1.0);
    }
    SUBCASE("build failure") {
        EvaluationReport r = ev.evaluate(cand("// stub: build=failed msg=no such identifier\nint a;"), task);
        CHECK(r.build.status == BuildStatus::failed);
        CHECK(r.build.log_excerpt == "no such identifier");
        CHECK(r.tests.status == TestStatus::skipped);
    }
    SUBCASE("race verdicts zero out the runtime") {
        EvaluationReport r = ev.evaluate(cand("// stub: race=race_detected\nint b;"), task);
        CHECK(r.race.status == RaceStatus::race_detected);
        CHECK_FALSE(r.runtime_s);
    }
    SUBCASE("per-thread timing table") {
        TaskSpec four = task;
        four.toolchain.thread_count = 4;
        EvaluationReport r = ev.evaluate(cand("// stub: times=1:1.0,2:0.5,4:0.25\nint c;"), four);
        CHECK(r.runtime_s == 0.25);
    }
    SUBCASE("flaky timing downgrades tests and discards the race verdict") {
        EvaluationReport r = ev.evaluate(cand("// stub: flaky_timing=1\nint d;"), task);
        CHECK(r.tests.status == TestStatus::failed);
        CHECK(r.race.status == RaceStatus::skipped);
        CHECK_FALSE(r.runtime_s);
        CHECK(r.gating_ok());
    }
    SUBCASE("infra directive") {
        EvaluationReport r = ev.evaluate(cand("// stub: infra=endpoint-down\nint e;"), task);
        REQUIRE(r.infra_error);
        CHECK(*r.infra_error == "endpoint-down");
    }
}

TEST_CASE("pipeline gating holds for randomized stage outcomes") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Diagnostic> diags;
        PipelineStages stages;
        stages.race_enabled = rng() % 4 != 0;
        stages.timing_enabled = rng() % 4 != 0;
        int build_roll = static_cast<int>(rng() % 3);
        int test_roll = static_cast<int>(rng() % 4);
        int race_roll = static_cast<int>(rng() % 4);
        int timing_roll = static_cast<int>(rng() % 3);
        stages.build = [&](std::string& artifact) -> BuildOutcome {
            if (build_roll == 2) throw InfraError("sandbox vanished");
            artifact = "a";
            return {build_roll == 0 ? BuildStatus::ok : BuildStatus::failed, "log"};
        };
        stages.tests = [&](const std::string&) -> TestOutcome {
            if (test_roll == 3) throw InfraError("runner died");
            return {test_roll == 0 ? TestStatus::passed : (test_roll == 1 ? TestStatus::failed : TestStatus::timed_out),
                    "c", "d"};
        };
        stages.race = [&]() -> RaceOutcome {
            if (race_roll == 3) throw InfraError("sanitizer missing");
            return {race_roll == 0 ? RaceStatus::clean
                                   : (race_roll == 1 ? RaceStatus::race_detected : RaceStatus::deadlock_suspected),
                    "r"};
        };
        stages.timing = [&]() -> std::optional<double> {
            if (timing_roll == 2) return std::nullopt;
            return 0.5 + static_cast<double>(timing_roll);
        };
        EvaluationReport r = run_pipeline("cid", stages, diags);
        INFO("trial ", trial);
        CHECK(r.gating_ok());
    }
}
