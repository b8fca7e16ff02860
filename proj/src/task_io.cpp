#include "task_io.hpp"

#include <algorithm>
#include <map>

#include "common.hpp"
#include "config.hpp"

namespace parevo {

namespace fs = std::filesystem;

TaskSpec load_task(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("task directory not found: " + dir.string());
    if (!fs::exists(dir / "problem.md")) throw ConfigError("task '" + dir.string() + "': missing problem.md");
    if (!fs::exists(dir / "task.toml")) throw ConfigError("task '" + dir.string() + "': missing task.toml");

    TaskSpec task;
    task.description = read_file(dir / "problem.md");

    ConfigFile cfg = ConfigFile::load((dir / "task.toml").string());
    task.id = cfg.get_string("task", "id", dir.filename().string());
    task.language = language_from_string(cfg.get_string("task", "language", "cxx_parlay"));
    task.time_limit_s = cfg.get_double("task", "time_limit_s", 1.0);

    ToolchainPolicy& tc = task.toolchain;
    tc.build_command = cfg.get_string_array("toolchain", "build_command", {});
    tc.sanitizer_build_command = cfg.get_string_array("toolchain", "sanitizer_build_command", {});
    tc.run_command = cfg.get_string_array("toolchain", "run_command", {"{bin}"});
    tc.thread_count = static_cast<int>(cfg.get_int("toolchain", "thread_count", 1));
    tc.repetitions = static_cast<int>(cfg.get_int("toolchain", "repetitions", 3));
    tc.compile_timeout_s = cfg.get_double("toolchain", "compile_timeout_s", 60.0);
    tc.run_timeout_s = cfg.get_double("toolchain", "run_timeout_s", 10.0);

    auto tests_dir = dir / "tests";
    if (fs::is_directory(tests_dir)) {
        std::map<std::string, fs::path> inputs;
        for (const auto& entry : fs::directory_iterator(tests_dir)) {
            if (entry.path().extension() == ".in") inputs[entry.path().stem().string()] = entry.path();
        }
        for (const auto& [stem, in_path] : inputs) {  // map iteration keeps case order stable
            fs::path out_path = tests_dir / (stem + ".out");
            if (!fs::exists(out_path))
                throw ConfigError("task '" + task.id + "': test " + stem + " has no .out file");
            task.test_cases.push_back({stem, read_file(in_path), read_file(out_path)});
        }
    }
    if (fs::exists(dir / "harness.src")) task.harness = read_file(dir / "harness.src");
    if (fs::exists(dir / "seed.src")) task.seed_solution = read_file(dir / "seed.src");
    if (fs::exists(dir / "baseline_seq.src")) task.sequential_baseline = read_file(dir / "baseline_seq.src");
    if (fs::exists(dir / "timing.in")) task.timing_input = read_file(dir / "timing.in");

    task.validate();
    return task;
}

namespace {

std::string toml_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string toml_array(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += toml_quote(items[i]);
    }
    out += "]";
    return out;
}

}  // namespace

void write_task(const fs::path& dir, const TaskSpec& task) {
    task.validate();
    fs::create_directories(dir);
    write_file(dir / "problem.md", task.description);

    std::string toml;
    toml += "[task]\n";
    toml += "id = " + toml_quote(task.id) + "\n";
    toml += "language = " + toml_quote(std::string(to_string(task.language))) + "\n";
    toml += "time_limit_s = " + format_double(task.time_limit_s) + "\n\n";
    toml += "[toolchain]\n";
    toml += "build_command = " + toml_array(task.toolchain.build_command) + "\n";
    if (!task.toolchain.sanitizer_build_command.empty())
        toml += "sanitizer_build_command = " + toml_array(task.toolchain.sanitizer_build_command) + "\n";
    toml += "run_command = " + toml_array(task.toolchain.run_command) + "\n";
    toml += "thread_count = " + std::to_string(task.toolchain.thread_count) + "\n";
    toml += "repetitions = " + std::to_string(task.toolchain.repetitions) + "\n";
    toml += "compile_timeout_s = " + format_double(task.toolchain.compile_timeout_s) + "\n";
    toml += "run_timeout_s = " + format_double(task.toolchain.run_timeout_s) + "\n";
    write_file(dir / "task.toml", toml);

    for (const auto& tc : task.test_cases) {
        write_file(dir / "tests" / (tc.id + ".in"), tc.input);
        write_file(dir / "tests" / (tc.id + ".out"), tc.expected);
    }
    if (task.harness) write_file(dir / "harness.src", *task.harness);
    if (task.seed_solution) write_file(dir / "seed.src", *task.seed_solution);
    if (task.sequential_baseline) write_file(dir / "baseline_seq.src", *task.sequential_baseline);
    if (task.timing_input) write_file(dir / "timing.in", *task.timing_input);
}

}  // namespace parevo
