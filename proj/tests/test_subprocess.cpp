#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "subprocess.hpp"

using namespace parevo;

TEST_CASE("captures stdout and exit code") {
    RunSpec spec;
    spec.argv = {"sh", "-c", "echo hello; echo err >&2; exit 3"};
    spec.timeout_s = 5;
    ExecutionResult res = run_process(spec);
    CHECK_FALSE(res.spawn_failed);
    CHECK_FALSE(res.timed_out);
    CHECK(res.exit_code == 3);
    CHECK(res.stdout_text == "hello\n");
    CHECK(res.stderr_text == "err\n");
    CHECK(res.wall_time_s > 0);
}

TEST_CASE("feeds stdin") {
    RunSpec spec;
    spec.argv = {"cat"};
    spec.stdin_data = "line one\nline two\n";
    spec.timeout_s = 5;
    ExecutionResult res = run_process(spec);
    CHECK(res.ok());
    CHECK(res.stdout_text == spec.stdin_data);
}

TEST_CASE("large stdin does not deadlock") {
    std::string big(512 * 1024, 'x');
    RunSpec spec;
    spec.argv = {"cat"};
    spec.stdin_data = big;
    spec.timeout_s = 10;
    spec.capture_cap = big.size() + 16;
    ExecutionResult res = run_process(spec);
    CHECK(res.ok());
    CHECK(res.stdout_text.size() == big.size());
}

TEST_CASE("timeout kills the process group") {
    RunSpec spec;
    spec.argv = {"sh", "-c", "sleep 30"};
    spec.timeout_s = 0.3;
    ExecutionResult res = run_process(spec);
    CHECK(res.timed_out);
    CHECK(res.wall_time_s >= 0.3);
    CHECK(res.wall_time_s < 5.0);
}

TEST_CASE("missing binary reports spawn failure") {
    RunSpec spec;
    spec.argv = {"definitely-not-a-real-binary-470283"};
    spec.timeout_s = 2;
    ExecutionResult res = run_process(spec);
    CHECK(res.spawn_failed);
    CHECK(res.spawn_error.find("definitely-not-a-real-binary") != std::string::npos);
}

TEST_CASE("capture cap truncates but keeps reading") {
    RunSpec spec;
    spec.argv = {"sh", "-c", "i=0; while [ $i -lt 2000 ]; do echo 0123456789012345678901234567890123456789; i=$((i+1)); done"};
    spec.timeout_s = 10;
    spec.capture_cap = 1000;
    ExecutionResult res = run_process(spec);
    CHECK(res.ok());  // child was fully drained, not blocked
    CHECK(res.stdout_text.size() == 1000);
    CHECK(res.stdout_truncated);
}

TEST_CASE("environment overlay") {
    RunSpec spec;
    spec.argv = {"sh", "-c", "printf '%s' \"$PAREVO_TEST_VAR\""};
    spec.env["PAREVO_TEST_VAR"] = "42-threads";
    spec.timeout_s = 5;
    ExecutionResult res = run_process(spec);
    CHECK(res.stdout_text == "42-threads");
}

TEST_CASE("termination by signal is reported") {
    RunSpec spec;
    spec.argv = {"sh", "-c", "kill -SEGV $$"};
    spec.timeout_s = 5;
    ExecutionResult res = run_process(spec);
    CHECK(res.term_signal == 11);
    CHECK_FALSE(res.ok());
}

TEST_CASE("working directory honored") {
    RunSpec spec;
    spec.argv = {"pwd"};
    spec.cwd = "/tmp";
    spec.timeout_s = 5;
    ExecutionResult res = run_process(spec);
    CHECK(res.stdout_text.find("/tmp") == 0);
}
