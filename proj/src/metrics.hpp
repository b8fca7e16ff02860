#ifndef PAREVO_METRICS_HPP
#define PAREVO_METRICS_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "types.hpp"

namespace parevo {

struct SampleOutcome {
    std::string task_id;
    int sample_index = 0;
    bool built = false;
    bool passed = false;
    std::optional<double> runtime_s;
    std::optional<double> baseline_sequential_s;
};

double build_at_1(std::span<const SampleOutcome> samples);
double pass_at_1(std::span<const SampleOutcome> samples);

// Sequential-baseline time over candidate time for passing samples, 0 for
// failing ones. Not clamped: a passing-but-slower candidate scores < 1.
double speedup_at_1(const SampleOutcome& sample);

double mean_task_speedup(std::span<const SampleOutcome> samples);

// Unweighted arithmetic mean over per-task mean speedups.
double expected_speedup(std::span<const double> per_task_means);

struct ScalingPoint {
    int threads = 1;
    double runtime_s = 0.0;
};

struct ScalingCurve {
    std::string task_id;
    std::vector<ScalingPoint> points;  // thread counts strictly increasing
    bool partial = false;              // some thread count failed to produce a timing

    // T(1 thread) / T(t threads) per point.
    std::vector<double> relative_speedups() const;
};

struct TaskMetrics {
    std::string task_id;
    double build_at_1 = 0.0;
    double pass_at_1 = 0.0;
    double mean_speedup = 0.0;
};

struct MetricsReport {
    std::vector<TaskMetrics> tasks;
    std::optional<double> expected;  // absent for an empty suite

    static MetricsReport from_samples(const std::vector<SampleOutcome>& samples);
};

enum class ReportFormat { table_text, csv, json };
ReportFormat report_format_from_string(std::string_view name);

void emit_report(const MetricsReport& report, const std::filesystem::path& path, ReportFormat format);
MetricsReport read_report(const std::filesystem::path& path, ReportFormat format);  // csv and json only

// Times one candidate across thread counts through the evaluation pipeline
// (full evaluate per point, with the policy pinned to that count).
// thread_counts must include 1 and be strictly increasing.
ScalingCurve strong_scaling(const TaskSpec& task, const std::string& candidate_source, const RunConfig& config,
                            const std::vector<int>& thread_counts);

// Bench driver: each subdirectory of `suite_dir` is a task directory whose
// samples/ folder holds candidate sources. Samples are evaluated, the
// sequential baseline is timed at one thread, and when thread_counts is
// non-empty a scaling sweep runs on the first passing sample per task.
struct BenchResult {
    MetricsReport report;
    std::vector<ScalingCurve> curves;
    std::vector<SampleOutcome> samples;
};

BenchResult run_bench(const std::filesystem::path& suite_dir, int samples_per_task, const RunConfig& config,
                      const std::vector<int>& thread_counts = {});

}  // namespace parevo

#endif
