#ifndef PAREVO_TASK_IO_HPP
#define PAREVO_TASK_IO_HPP

#include <filesystem>

#include "types.hpp"

namespace parevo {

// Task directory layout:
//   problem.md            problem statement (required)
//   task.toml             [task] + [toolchain] config (required)
//   tests/NN.in, NN.out   io test cases, paired by stem
//   harness.src           assertion harness fragment
//   seed.src              optional starting solution
//   baseline_seq.src      optional sequential reference
//   timing.in             optional designated profiling input
TaskSpec load_task(const std::filesystem::path& dir);

// Inverse of load_task for synthesized tasks.
void write_task(const std::filesystem::path& dir, const TaskSpec& task);

}  // namespace parevo

#endif
