#ifndef PAREVO_SUBPROCESS_HPP
#define PAREVO_SUBPROCESS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace parevo {

struct RunSpec {
    std::vector<std::string> argv;               // argv[0] resolved via PATH
    std::map<std::string, std::string> env;      // overlaid on the parent environment
    std::string stdin_data;
    std::optional<std::string> cwd;
    double timeout_s = 10.0;
    std::size_t capture_cap = 1 << 20;           // per stream; head kept, rest discarded
};

struct ExecutionResult {
    int exit_code = -1;         // meaningful when term_signal == 0 and !spawn_failed
    int term_signal = 0;        // nonzero when killed by a signal
    bool timed_out = false;
    bool spawn_failed = false;  // exec never happened (missing binary, bad cwd)
    std::string spawn_error;
    std::string stdout_text;
    std::string stderr_text;
    bool stdout_truncated = false;
    bool stderr_truncated = false;
    double wall_time_s = 0.0;

    bool ok() const { return !spawn_failed && !timed_out && term_signal == 0 && exit_code == 0; }
};

// Runs one sandboxed subprocess in its own process group; on timeout the
// whole group gets SIGKILL. Never throws for child-side failures.
ExecutionResult run_process(const RunSpec& spec);

}  // namespace parevo

#endif
