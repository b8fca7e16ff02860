// Black-box tests of the installed CLI binary: exit-code contract, run
// directory layout, determinism of mock-backed commands.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "subprocess.hpp"
#include "test_util.hpp"

using namespace parevo;

namespace {

ExecutionResult run_cli(std::vector<std::string> args, double timeout_s = 60.0) {
    RunSpec spec;
    spec.argv = {PAREVO_CLI_PATH};
    for (auto& a : args) spec.argv.push_back(std::move(a));
    spec.timeout_s = timeout_s;
    return run_process(spec);
}

std::string det_playlist() { return test_util::fixture("playlists/det/playlist.json").string(); }
std::string stub_task() { return test_util::fixture("tasks/stub").string(); }

}  // namespace

TEST_CASE("evolve: mock playlist with stub evaluation produces a full run directory") {
    test_util::TempDir tmp("cli-evolve");
    std::string run_dir = (tmp / "run").string();
    ExecutionResult res = run_cli({"evolve", "--task", stub_task(), "--generator", "mock:" + det_playlist(),
                                   "--evaluator", "stub", "--iterations", "2", "--seed", "7", "--out", run_dir});
    INFO(res.stdout_text, res.stderr_text);
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("best candidate") != std::string::npos);
    for (const char* name :
         {"config.snapshot", "events.jsonl", "trajectory.jsonl", "archive.snapshot", "best.src", "manifest.json"})
        CHECK(std::filesystem::exists(tmp / "run" / name));

    std::string manifest = test_util::slurp(tmp / "run" / "manifest.json");
    CHECK(manifest.find("best.src") != std::string::npos);
    CHECK(manifest.find("\"command\"") != std::string::npos);

    SUBCASE("report re-renders the persisted run") {
        ExecutionResult rep = run_cli({"report", "--run", run_dir});
        CHECK(rep.exit_code == 0);
        CHECK(rep.stdout_text.find("best:") != std::string::npos);
        CHECK(rep.stdout_text.find("candidates evaluated: 6") != std::string::npos);
    }
    SUBCASE("pairs then compare over the produced trajectory") {
        std::string pairs = (tmp / "pairs.jsonl").string();
        ExecutionResult p =
            run_cli({"synthesize", "pairs", "--in", run_dir + "/trajectory.jsonl", "--out", pairs});
        CHECK(p.exit_code == 0);
        // Timed candidates 1.0, 0.8, 0.5: pairs (1.0,0.8), (1.0,0.5), (0.8,0.5).
        CHECK(p.stdout_text.find("3 pairs") != std::string::npos);

        std::string cmp1 = (tmp / "cmp1.jsonl").string();
        std::string cmp2 = (tmp / "cmp2.jsonl").string();
        ExecutionResult c1 = run_cli({"synthesize", "compare", "--in", pairs, "--seed", "5", "--out", cmp1});
        ExecutionResult c2 = run_cli({"synthesize", "compare", "--in", pairs, "--seed", "5", "--out", cmp2});
        CHECK(c1.exit_code == 0);
        CHECK(c2.exit_code == 0);
        CHECK(test_util::slurp(cmp1) == test_util::slurp(cmp2));
        CHECK_FALSE(test_util::slurp(cmp1).empty());
    }
}

TEST_CASE("evolve: validation failures exit 1 before any generation") {
    test_util::TempDir tmp("cli-bad");
    test_util::spit(tmp / "task" / "task.toml", "[task]\nid = \"x\"\n");  // no problem.md
    ExecutionResult res = run_cli({"evolve", "--task", (tmp / "task").string(), "--generator",
                                   "mock:" + det_playlist(), "--evaluator", "stub", "--out", (tmp / "r").string()});
    CHECK(res.exit_code == 1);
    CHECK_FALSE(std::filesystem::exists(tmp / "r" / "trajectory.jsonl"));
}

TEST_CASE("evolve: a playlist of broken code exits 2") {
    test_util::TempDir tmp("cli-broken");
    test_util::spit(tmp / "bad.src", "// stub: build=failed msg=nope\nint main() { return 0; }\n");
    test_util::spit(tmp / "playlist.json", "{\"0\": [\"bad.src\"]}");
    ExecutionResult res =
        run_cli({"evolve", "--task", stub_task(), "--generator", "mock:" + (tmp / "playlist.json").string(),
                 "--evaluator", "stub", "--iterations", "0", "--out", (tmp / "run").string()});
    CHECK(res.exit_code == 2);
    CHECK(res.stdout_text.find("no valid solution") != std::string::npos);
    CHECK(std::filesystem::exists(tmp / "run" / "trajectory.jsonl"));
    CHECK_FALSE(std::filesystem::exists(tmp / "run" / "best.src"));
}

TEST_CASE("evolve runs are byte-identical given equal task, config, seed and playlist") {
    test_util::TempDir tmp("cli-det");
    auto run_one = [&](const std::string& name) {
        ExecutionResult res =
            run_cli({"evolve", "--task", stub_task(), "--generator", "mock:" + det_playlist(), "--evaluator",
                     "stub", "--iterations", "2", "--seed", "11", "--out", (tmp / name).string()});
        REQUIRE(res.exit_code == 0);
    };
    run_one("a");
    run_one("b");
    CHECK(test_util::slurp(tmp / "a" / "trajectory.jsonl") == test_util::slurp(tmp / "b" / "trajectory.jsonl"));
    CHECK(test_util::slurp(tmp / "a" / "best.src") == test_util::slurp(tmp / "b" / "best.src"));
    CHECK_FALSE(test_util::slurp(tmp / "a" / "best.src").empty());
}

TEST_CASE("synthesize clean drops infrastructure failures and holdout tasks") {
    test_util::TempDir tmp("cli-clean");
    std::string out = (tmp / "cleaned.jsonl").string();
    ExecutionResult res =
        run_cli({"synthesize", "clean", "--in", test_util::fixture("corpus/logs.jsonl").string(), "--holdout",
                 test_util::fixture("corpus/holdout.txt").string(), "--out", out});
    CHECK(res.exit_code == 0);
    std::string text = test_util::slurp(out);
    CHECK(text.find("infra_error") == std::string::npos);
    CHECK(text.find("sort2") == std::string::npos);
    CHECK(res.stdout_text.find("3 records") != std::string::npos);
}

TEST_CASE("synthesize critic against the stub evaluator") {
    test_util::TempDir tmp("cli-critic");
    test_util::spit(tmp / "ok.src", "// stub: tests=passed\nint main() { return 0; }\n");
    test_util::spit(tmp / "bad.src", "// stub: build=failed\nint main() { return 1; }\n");
    std::string out = (tmp / "corpus.jsonl").string();
    ExecutionResult res = run_cli({"synthesize", "critic", "--task", stub_task(), "--code", (tmp / "ok.src").string(),
                                   "--code", (tmp / "bad.src").string(), "--evaluator", "stub", "--out", out});
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("accepted 1/2") != std::string::npos);
}

TEST_CASE("synthesize mutate writes a new task directory") {
    test_util::TempDir tmp("cli-mutate");
    test_util::spit(tmp / "reply.src", "DESCRIPTION:\nSort only even numbers.\nHARNESS:\nint main() { return 0; }\n");
    test_util::spit(tmp / "playlist.json", "{\"0\": [\"reply.src\"]}");
    ExecutionResult res = run_cli({"synthesize", "mutate", "--task", test_util::fixture("tasks/harness").string(),
                                   "--kind", "constraint", "--generator",
                                   "mock:" + (tmp / "playlist.json").string(), "--seed", "1", "--out",
                                   (tmp / "mutated").string()});
    INFO(res.stderr_text);
    CHECK(res.exit_code == 0);
    CHECK(test_util::slurp(tmp / "mutated" / "problem.md").find("even numbers") != std::string::npos);
    CHECK(std::filesystem::exists(tmp / "mutated" / "harness.src"));
}

TEST_CASE("bench exit codes and artifacts") {
    test_util::TempDir tmp("cli-bench");
    // Stub suite with one task.
    auto tdir = tmp / "suite" / "t0";
    test_util::spit(tdir / "problem.md", "p\n");
    test_util::spit(tdir / "task.toml",
                    "[task]\nid = \"t0\"\nlanguage = \"cxx_parlay\"\ntime_limit_s = 1.0\n\n[toolchain]\n"
                    "build_command = [\"true\", \"{src}\", \"{out}\"]\nrun_command = [\"{bin}\"]\n");
    test_util::spit(tdir / "tests" / "00.in", "1\n");
    test_util::spit(tdir / "tests" / "00.out", "1\n");
    test_util::spit(tdir / "baseline_seq.src", "// stub: time=3.0\nstatic int b = 0;\nint main() { return 0; }\n");
    test_util::spit(tdir / "samples" / "00.src",
                    "// stub: times=1:1.0,2:0.5,4:0.25\nstatic int s = 0;\nint main() { return 0; }\n");

    std::string out = (tmp / "report.csv").string();
    ExecutionResult res = run_cli({"bench", "--suite", (tmp / "suite").string(), "--evaluator", "stub", "--threads",
                                   "1,2,4", "--out", out, "--format", "csv"});
    INFO(res.stderr_text);
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(tmp / "report.csv"));
    CHECK(std::filesystem::exists(tmp / "report.csv.scaling.json"));
    std::string scaling = test_util::slurp(tmp / "report.csv.scaling.json");
    CHECK(scaling.find("\"threads\": 4") != std::string::npos);

    SUBCASE("unreadable suite dir exits 1") {
        ExecutionResult bad =
            run_cli({"bench", "--suite", (tmp / "nope").string(), "--evaluator", "stub", "--out", out});
        CHECK(bad.exit_code == 1);
    }
}
