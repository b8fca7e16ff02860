#include "metrics.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "common.hpp"
#include "evaluator.hpp"
#include "task_io.hpp"
#include "vendor_json.hpp"

namespace parevo {

namespace fs = std::filesystem;

double build_at_1(std::span<const SampleOutcome> samples) {
    if (samples.empty()) throw PreconditionError("build_at_1: empty sample set");
    double built = 0;
    for (const auto& s : samples) built += s.built ? 1.0 : 0.0;
    return built / static_cast<double>(samples.size());
}

double pass_at_1(std::span<const SampleOutcome> samples) {
    if (samples.empty()) throw PreconditionError("pass_at_1: empty sample set");
    double passed = 0;
    for (const auto& s : samples) passed += s.passed ? 1.0 : 0.0;
    return passed / static_cast<double>(samples.size());
}

double speedup_at_1(const SampleOutcome& sample) {
    if (!sample.passed) return 0.0;
    if (!sample.baseline_sequential_s)
        throw ConfigError("speedup_at_1: passing sample for task '" + sample.task_id +
                          "' has no sequential baseline time");
    if (!sample.runtime_s || *sample.runtime_s <= 0)
        throw ConfigError("speedup_at_1: passing sample for task '" + sample.task_id + "' has no runtime");
    return *sample.baseline_sequential_s / *sample.runtime_s;
}

double mean_task_speedup(std::span<const SampleOutcome> samples) {
    if (samples.empty()) throw PreconditionError("mean_task_speedup: empty sample set");
    double sum = 0;
    for (const auto& s : samples) sum += speedup_at_1(s);
    return sum / static_cast<double>(samples.size());
}

double expected_speedup(std::span<const double> per_task_means) {
    if (per_task_means.empty()) throw PreconditionError("expected_speedup: no tasks");
    double sum = 0;
    for (double m : per_task_means) sum += m;
    return sum / static_cast<double>(per_task_means.size());
}

std::vector<double> ScalingCurve::relative_speedups() const {
    std::vector<double> out;
    if (points.empty() || points.front().threads != 1) return out;  // no 1-thread anchor
    double base = points.front().runtime_s;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(base / p.runtime_s);
    return out;
}

MetricsReport MetricsReport::from_samples(const std::vector<SampleOutcome>& samples) {
    std::map<std::string, std::vector<SampleOutcome>> by_task;
    for (const auto& s : samples) by_task[s.task_id].push_back(s);

    MetricsReport report;
    std::vector<double> means;
    for (const auto& [task_id, task_samples] : by_task) {
        TaskMetrics m;
        m.task_id = task_id;
        m.build_at_1 = build_at_1(task_samples);
        m.pass_at_1 = pass_at_1(task_samples);
        m.mean_speedup = mean_task_speedup(task_samples);
        means.push_back(m.mean_speedup);
        report.tasks.push_back(std::move(m));
    }
    if (!means.empty()) report.expected = expected_speedup(means);
    return report;
}

ReportFormat report_format_from_string(std::string_view name) {
    if (name == "table-text" || name == "table") return ReportFormat::table_text;
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    throw ConfigError("unknown report format: '" + std::string(name) + "'");
}

namespace {

constexpr std::string_view kCsvHeader = "task,build_at_1,pass_at_1,mean_speedup_at_1";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

void emit_report(const MetricsReport& report, const fs::path& path, ReportFormat format) {
    switch (format) {
        case ReportFormat::csv: {
            std::string out{kCsvHeader};
            out += '\n';
            for (const auto& t : report.tasks) {
                out += t.task_id + "," + format_double(t.build_at_1) + "," + format_double(t.pass_at_1) + "," +
                       format_double(t.mean_speedup) + "\n";
            }
            out += "expected_speedup,,,";
            out += report.expected ? format_double(*report.expected) : "empty";
            out += '\n';
            write_file(path, out);
            return;
        }
        case ReportFormat::json: {
            nlohmann::ordered_json j;
            j["tasks"] = nlohmann::ordered_json::array();
            for (const auto& t : report.tasks)
                j["tasks"].push_back({{"task", t.task_id},
                                      {"build_at_1", t.build_at_1},
                                      {"pass_at_1", t.pass_at_1},
                                      {"mean_speedup_at_1", t.mean_speedup}});
            j["expected_speedup"] =
                report.expected ? nlohmann::ordered_json(*report.expected) : nlohmann::ordered_json(nullptr);
            write_file(path, j.dump(2) + "\n");
            return;
        }
        case ReportFormat::table_text: {
            std::string out = "task                         build@1   pass@1    mean speedup@1\n";
            for (const auto& t : report.tasks) {
                std::string row = t.task_id;
                row.resize(std::max<std::size_t>(row.size() + 1, 29), ' ');
                std::string build = format_double(t.build_at_1);
                build.resize(std::max<std::size_t>(build.size() + 1, 10), ' ');
                std::string pass = format_double(t.pass_at_1);
                pass.resize(std::max<std::size_t>(pass.size() + 1, 10), ' ');
                out += row + build + pass + format_double(t.mean_speedup) + "\n";
            }
            out += report.expected ? "expected speedup: " + format_double(*report.expected) + "\n"
                                   : "expected speedup: (no tasks)\n";
            write_file(path, out);
            return;
        }
    }
}

MetricsReport read_report(const fs::path& path, ReportFormat format) {
    if (format == ReportFormat::json) {
        nlohmann::json j = nlohmann::json::parse(read_file(path));
        MetricsReport report;
        for (const auto& t : j.at("tasks"))
            report.tasks.push_back({t.at("task").get<std::string>(), t.at("build_at_1").get<double>(),
                                    t.at("pass_at_1").get<double>(), t.at("mean_speedup_at_1").get<double>()});
        if (!j.at("expected_speedup").is_null()) report.expected = j.at("expected_speedup").get<double>();
        return report;
    }
    if (format != ReportFormat::csv) throw ConfigError("read_report supports csv and json");

    std::ifstream in(path);
    if (!in) throw IoError("cannot read report: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw ParseError(path.string() + ": missing csv header");
    MetricsReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 4) throw ParseError(path.string() + ": malformed row '" + line + "'");
        if (cells[0] == "expected_speedup") {
            if (cells[3] != "empty") report.expected = parse_double(cells[3]);
            continue;
        }
        report.tasks.push_back(
            {cells[0], parse_double(cells[1]), parse_double(cells[2]), parse_double(cells[3])});
    }
    return report;
}

// ---------------------------------------------------------------------------
// scaling + bench driver

ScalingCurve strong_scaling(const TaskSpec& task, const std::string& candidate_source, const RunConfig& config,
                            const std::vector<int>& thread_counts) {
    if (thread_counts.empty() || thread_counts.front() != 1)
        throw ConfigError("strong_scaling: thread counts must start at 1");
    if (!std::is_sorted(thread_counts.begin(), thread_counts.end()) ||
        std::adjacent_find(thread_counts.begin(), thread_counts.end()) != thread_counts.end())
        throw ConfigError("strong_scaling: thread counts must be strictly increasing");

    ScalingCurve curve;
    curve.task_id = task.id;
    Candidate candidate = Candidate::make(candidate_source, task.language, 0, {}, Origin::generated);
    for (int threads : thread_counts) {
        TaskSpec pinned = task;
        pinned.toolchain.thread_count = threads;
        auto evaluator = make_evaluator(config);
        EvaluationReport report = evaluator->evaluate(candidate, pinned);
        if (report.infra_error) throw InfraError("scaling sweep: " + *report.infra_error);
        if (!report.runtime_s) {
            curve.partial = true;
            continue;
        }
        curve.points.push_back({threads, *report.runtime_s});
    }
    return curve;
}

BenchResult run_bench(const fs::path& suite_dir, int samples_per_task, const RunConfig& config,
                      const std::vector<int>& thread_counts) {
    if (!fs::is_directory(suite_dir)) throw ConfigError("suite directory not found: " + suite_dir.string());

    std::vector<fs::path> task_dirs;
    for (const auto& entry : fs::directory_iterator(suite_dir))
        if (entry.is_directory()) task_dirs.push_back(entry.path());
    std::sort(task_dirs.begin(), task_dirs.end());
    if (task_dirs.empty()) throw ConfigError("suite has no task directories: " + suite_dir.string());

    BenchResult result;
    std::set<std::string> task_ids;
    for (const auto& dir : task_dirs) {
        TaskSpec task = load_task(dir);
        if (!task_ids.insert(task.id).second)
            throw ConfigError("duplicate task id in suite: '" + task.id + "'");

        // The sequential reference is timed through the same pipeline,
        // pinned to one thread.
        std::optional<double> baseline_s;
        if (task.sequential_baseline) {
            TaskSpec pinned = task;
            pinned.toolchain.thread_count = 1;
            auto evaluator = make_evaluator(config);
            Candidate base = Candidate::make(*task.sequential_baseline, task.language, 0, {}, Origin::seed);
            EvaluationReport report = evaluator->evaluate(base, pinned);
            if (report.infra_error) throw InfraError("baseline for '" + task.id + "': " + *report.infra_error);
            baseline_s = report.runtime_s;
        }

        std::vector<fs::path> sample_files;
        if (fs::is_directory(dir / "samples")) {
            for (const auto& entry : fs::directory_iterator(dir / "samples"))
                if (entry.is_regular_file()) sample_files.push_back(entry.path());
            std::sort(sample_files.begin(), sample_files.end());
        }
        if (samples_per_task > 0 && static_cast<int>(sample_files.size()) > samples_per_task)
            sample_files.resize(static_cast<std::size_t>(samples_per_task));
        if (sample_files.empty())
            throw ConfigError("task '" + task.id + "' has no samples/ directory with candidate sources");

        std::optional<std::string> first_passing;
        int index = 0;
        for (const auto& file : sample_files) {
            std::string source = read_file(file);
            auto evaluator = make_evaluator(config);
            Candidate cand = Candidate::make(source, task.language, 0, {}, Origin::generated);
            EvaluationReport report = evaluator->evaluate(cand, task);
            if (report.infra_error)
                throw InfraError("sample " + file.filename().string() + ": " + *report.infra_error);

            SampleOutcome outcome;
            outcome.task_id = task.id;
            outcome.sample_index = index++;
            outcome.built = report.build.status == BuildStatus::ok;
            outcome.passed = report.tests.status == TestStatus::passed && report.runtime_s.has_value();
            outcome.runtime_s = report.runtime_s;
            outcome.baseline_sequential_s = baseline_s;
            if (outcome.passed && !first_passing) first_passing = source;
            result.samples.push_back(std::move(outcome));
        }

        if (!thread_counts.empty() && first_passing)
            result.curves.push_back(strong_scaling(task, *first_passing, config, thread_counts));
    }

    result.report = MetricsReport::from_samples(result.samples);
    return result;
}

}  // namespace parevo
