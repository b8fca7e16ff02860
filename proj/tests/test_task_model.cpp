#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "common.hpp"
#include "sha256.hpp"
#include "task_io.hpp"
#include "test_util.hpp"
#include "text.hpp"
#include "types.hpp"

using namespace parevo;

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // Multi-block input (> 64 bytes) exercises the padding path.
    std::string longish(200, 'a');
    CHECK(sha256_hex(longish) == sha256_hex(longish));
    CHECK(sha256_hex(longish) != sha256_hex(longish + "a"));
}

TEST_CASE("normalization strips comments and collapses whitespace") {
    CHECK(normalize_source("int x;  // note\n", Language::cxx_parlay) == "int x;");
    CHECK(normalize_source("int/*gap*/y;", Language::cxx_parlay) == "int y;");
    CHECK(normalize_source("  a\t b\nc  ", Language::cxx_parlay) == "a b c");
    // String literals keep their contents, including comment-looking text.
    CHECK(normalize_source("char* s = \"a//b\";", Language::cxx_parlay) ==
          "char* s = \"a//b\";");
    // Rust block comments nest.
    CHECK(normalize_source("/* a /* b */ c */ fn main() {}", Language::rust_rayon) == "fn main() {}");
    // Generic language also treats # as a line comment.
    CHECK(normalize_source("x = 1 # note\n", Language::other) == "x = 1");
}

TEST_CASE("normalize_and_hash identity rules") {
    // Empty input hashes to the digest of the empty string, stable.
    CHECK(normalize_and_hash("", Language::cxx_parlay) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(normalize_and_hash("int x;  // note\n", Language::cxx_parlay) ==
          normalize_and_hash("int x;\n", Language::cxx_parlay));

    std::string a = test_util::slurp(test_util::fixture("features/indent_a.src"));
    std::string b = test_util::slurp(test_util::fixture("features/indent_b.src"));
    REQUIRE(a != b);
    CHECK(normalize_and_hash(a, Language::cxx_parlay) == normalize_and_hash(b, Language::cxx_parlay));
}

TEST_CASE("hash determinism over random sources") {
    std::mt19937_64 rng(7);
    const std::string alphabet = "abc {}/*//\n\t\"';=+-xyz_09";
    for (int i = 0; i < 200; ++i) {
        std::string src;
        std::size_t len = rng() % 400;
        for (std::size_t k = 0; k < len; ++k) src += alphabet[rng() % alphabet.size()];
        std::string h1 = normalize_and_hash(src, Language::cxx_parlay);
        std::string h2 = normalize_and_hash(src, Language::cxx_parlay);
        CHECK(h1 == h2);
        CHECK(h1.size() == 64);
    }
}

TEST_CASE("candidate construction") {
    Candidate c = Candidate::make("int main() {}\n", Language::cxx_parlay, 3, {"p1", "p2"}, Origin::mutated);
    CHECK(c.id == normalize_and_hash("int main() {}", Language::cxx_parlay));
    CHECK(c.generation == 3);
    CHECK(c.parent_ids.size() == 2);
    CHECK(c.origin == Origin::mutated);
}

TEST_CASE("toolchain policy validation") {
    ToolchainPolicy tc;
    tc.build_command = {"g++", "{src}", "-o", "{out}"};
    tc.run_command = {"{bin}"};
    CHECK_NOTHROW(tc.validate());

    ToolchainPolicy no_src = tc;
    no_src.build_command = {"g++", "-o", "{out}"};
    CHECK_THROWS_AS(no_src.validate(), ConfigError);

    ToolchainPolicy no_bin = tc;
    no_bin.run_command = {"run"};
    CHECK_THROWS_AS(no_bin.validate(), ConfigError);

    ToolchainPolicy bad_rep = tc;
    bad_rep.repetitions = 0;
    CHECK_THROWS_AS(bad_rep.validate(), ConfigError);

    ToolchainPolicy bad_timeout = tc;
    bad_timeout.compile_timeout_s = 0;
    CHECK_THROWS_AS(bad_timeout.validate(), ConfigError);
}

TEST_CASE("task validation") {
    TaskSpec task;
    task.id = "t";
    task.toolchain.build_command = {"cc", "{src}", "{out}"};
    task.test_cases.push_back({"00", "1", "1"});
    CHECK_NOTHROW(task.validate());

    TaskSpec empty_id = task;
    empty_id.id = "";
    CHECK_THROWS_AS(empty_id.validate(), ConfigError);

    TaskSpec no_tests = task;
    no_tests.test_cases.clear();
    CHECK_THROWS_AS(no_tests.validate(), ConfigError);
    no_tests.harness = "int main() { return 0; }";
    CHECK_NOTHROW(no_tests.validate());

    TaskSpec bad_limit = task;
    bad_limit.time_limit_s = 0;
    CHECK_THROWS_AS(bad_limit.validate(), ConfigError);
}

TEST_CASE("task directory loader") {
    TaskSpec task = load_task(test_util::fixture("tasks/echo"));
    CHECK(task.id == "echo");
    CHECK(task.language == Language::cxx_parlay);
    CHECK(task.time_limit_s == 5.0);
    REQUIRE(task.test_cases.size() == 2);
    CHECK(task.test_cases[0].id == "00");
    CHECK(task.test_cases[0].input == "5\n");
    CHECK(task.test_cases[1].id == "01");
    CHECK(task.toolchain.thread_count == 2);
    CHECK_FALSE(task.seed_solution);

    CHECK_THROWS_AS(load_task(test_util::fixture("tasks/does-not-exist")), ConfigError);

    test_util::TempDir dir("no-problem");
    test_util::spit(dir / "task.toml", "[task]\nid = \"x\"\n");
    CHECK_THROWS_AS(load_task(dir.path()), ConfigError);
}

TEST_CASE("task write/load round trip") {
    TaskSpec task = load_task(test_util::fixture("tasks/harness"));
    task.id = "harness-add.type";
    task.description = "Mutated description\n";
    test_util::TempDir dir("task-rt");
    write_task(dir / "out", task);
    TaskSpec back = load_task(dir / "out");
    CHECK(back.id == task.id);
    CHECK(back.description == task.description);
    CHECK(back.harness == task.harness);
    CHECK(back.toolchain.build_command == task.toolchain.build_command);
    CHECK(back.time_limit_s == task.time_limit_s);
}

TEST_CASE("report gating") {
    EvaluationReport r;
    r.build = {BuildStatus::failed, "boom"};
    r.tests = {TestStatus::skipped, "", ""};
    r.race = {RaceStatus::skipped, ""};
    CHECK(r.gating_ok());

    r.tests.status = TestStatus::failed;  // tests ran without a build
    CHECK_FALSE(r.gating_ok());
    CHECK_THROWS_AS(r.check_gating(), PreconditionError);

    EvaluationReport full;
    full.build = {BuildStatus::ok, ""};
    full.tests = {TestStatus::passed, "", ""};
    full.race = {RaceStatus::clean, ""};
    full.runtime_s = 0.25;
    CHECK(full.gating_ok());

    full.race.status = RaceStatus::race_detected;  // runtime without clean race
    CHECK_FALSE(full.gating_ok());

    EvaluationReport negative = full;
    negative.race.status = RaceStatus::clean;
    negative.runtime_s = -1.0;
    CHECK_FALSE(negative.gating_ok());
}

TEST_CASE("judge-style output comparison") {
    CHECK(outputs_match("5\n", "5"));
    CHECK(outputs_match("a  \nb\t\n", "a\nb"));
    CHECK(outputs_match("x\n\n\n", "x\n"));
    CHECK_FALSE(outputs_match("5\n", "6\n"));
    CHECK_FALSE(outputs_match("a\nb\n", "a\n"));
    CHECK(first_output_diff("5\n", "6\n").find("expected '6'") != std::string::npos);
}

TEST_CASE("median is the lower middle element") {
    CHECK(median_of({0.4, 0.09, 0.1}) == 0.1);
    CHECK(median_of({0.09, 0.1, 0.4}) == 0.1);
    CHECK(median_of({0.7}) == 0.7);
    CHECK(median_of({0.2, 0.1, 0.4, 0.3}) == 0.2);  // even count: no interpolation
    CHECK_THROWS_AS(median_of({}), PreconditionError);
}

TEST_CASE("double formatting round trips") {
    for (double v : {0.9737, 1e-9, 106.87, 0.42, 1.0 / 3.0, 123456789.123456}) {
        CHECK(parse_double(format_double(v)) == v);
    }
}
