#include "corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "common.hpp"
#include "rng.hpp"

namespace parevo {

const char* const kComparisonInstruction = "Determine which of the two code solutions has better performance.";

MutationKind mutation_kind_from_string(std::string_view name) {
    if (name == "type" || name == "type_mutation") return MutationKind::type_mutation;
    if (name == "constraint" || name == "cons" || name == "constraint_mutation")
        return MutationKind::constraint_mutation;
    if (name == "algorithmic" || name == "algo" || name == "algorithmic_mutation")
        return MutationKind::algorithmic_mutation;
    throw ConfigError("unknown mutation kind: '" + std::string(name) + "'");
}

std::string_view to_string(MutationKind kind) {
    switch (kind) {
        case MutationKind::type_mutation: return "type";
        case MutationKind::constraint_mutation: return "constraint";
        case MutationKind::algorithmic_mutation: return "algorithmic";
    }
    return "type";
}

// ---------------------------------------------------------------------------
// mutate_task

namespace {

std::string mutation_instruction(MutationKind kind) {
    switch (kind) {
        case MutationKind::type_mutation:
            return "Rewrite the task below so the underlying data type changes (for example int to string, or to a "
                   "custom struct), keeping the difficulty comparable.";
        case MutationKind::constraint_mutation:
            return "Rewrite the task below by adding a logical predicate that forces an extra processing step (for "
                   "example: only apply the operation to odd elements).";
        case MutationKind::algorithmic_mutation:
            return "Rewrite the task below by transforming the problem structure (for example: turn a reduction into "
                   "a prefix-sum / scan).";
    }
    return "";
}

std::string test_material(const TaskSpec& task) {
    if (task.harness) return *task.harness;
    std::string out;
    for (const auto& tc : task.test_cases) out += "input:\n" + tc.input + "expected output:\n" + tc.expected + "\n";
    return out;
}

}  // namespace

TaskSpec mutate_task(const TaskSpec& seed, MutationKind kind, CandidateGenerator& generator, std::uint64_t seed_rng) {
    std::string prompt = mutation_instruction(kind);
    prompt += "\n\nTASK DESCRIPTION:\n" + seed.description;
    prompt += "\nCURRENT TESTS:\n" + test_material(seed);
    prompt +=
        "\nAnswer with exactly two sections. A line containing only DESCRIPTION: followed by the new problem "
        "statement, then a line containing only HARNESS: followed by a complete self-checking test harness "
        "source (asserts, exit code 0 on success).\n";

    auto texts = generator.generate(prompt, 1, seed_rng);
    if (texts.empty()) throw ParseError("mutation rejected: generator produced no output");
    const std::string& reply = texts.front();

    auto section_after = [&](std::string_view marker) -> std::optional<std::string> {
        std::size_t at = reply.find(marker);
        if (at == std::string::npos) return std::nullopt;
        std::size_t start = at + marker.size();
        if (start < reply.size() && reply[start] == '\n') ++start;
        return reply.substr(start);
    };
    auto desc_tail = section_after("DESCRIPTION:");
    auto harness = section_after("HARNESS:");
    if (!desc_tail || !harness)
        throw ParseError("mutation rejected: reply lacks DESCRIPTION:/HARNESS: sections");
    std::string description = desc_tail->substr(0, desc_tail->find("HARNESS:"));
    while (!description.empty() && std::isspace(static_cast<unsigned char>(description.back()))) description.pop_back();
    while (!harness->empty() && std::isspace(static_cast<unsigned char>(harness->back()))) harness->pop_back();
    if (description.empty() || harness->empty())
        throw ParseError("mutation rejected: empty description or harness section");

    TaskSpec mutated = seed;
    mutated.id = seed.id + "." + std::string(to_string(kind));
    mutated.description = description + "\n";
    mutated.harness = *harness + "\n";
    mutated.test_cases.clear();
    mutated.seed_solution.reset();
    mutated.sequential_baseline.reset();
    mutated.timing_input.reset();
    mutated.validate();
    return mutated;
}

// ---------------------------------------------------------------------------
// critic_accept

namespace {

std::string unit_test_text(const TaskSpec& task) {
    if (task.harness) return *task.harness;
    nlohmann::ordered_json cases = nlohmann::ordered_json::array();
    for (const auto& tc : task.test_cases) cases.push_back({{"id", tc.id}, {"input", tc.input}, {"expected", tc.expected}});
    return cases.dump();
}

std::pair<std::string, std::vector<std::string>> split_mutation_chain(const std::string& task_id) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : task_id) {
        if (c == '.') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    std::string seed_id = parts.front();
    return {seed_id, std::vector<std::string>(parts.begin() + 1, parts.end())};
}

}  // namespace

std::variant<InstructionRecord, CriticRejection> critic_accept(const TaskSpec& task, const std::string& code,
                                                               Evaluator& evaluator, int retries) {
    Candidate candidate = Candidate::make(code, task.language, 0, {}, Origin::generated);
    EvaluationReport report;
    for (int attempt = 0;; ++attempt) {
        report = evaluator.evaluate(candidate, task);
        if (!report.infra_error) break;
        if (attempt >= retries) throw InfraError("critic: " + *report.infra_error);
    }

    if (report.build.status != BuildStatus::ok) return CriticRejection{"build", report.build.log_excerpt};
    if (report.tests.status != TestStatus::passed)
        return CriticRejection{"tests", "case " + report.tests.first_failed_case + ": " + report.tests.detail};

    auto [seed_id, chain] = split_mutation_chain(task.id);
    InstructionRecord record;
    record.instruction = task.description;
    record.target_code = code;
    record.unit_test = unit_test_text(task);
    record.seed_id = seed_id;
    record.mutation_chain = chain;
    record.generator_id = "critic";
    record.verified = true;
    return record;
}

// ---------------------------------------------------------------------------
// perf pairs / comparisons

std::vector<PerfPair> extract_perf_pairs(const Trajectory& trajectory, double threshold) {
    struct Timed {
        const TrajectoryEntry* entry;
    };
    std::vector<Timed> timed;
    for (const auto& e : trajectory.entries) {
        if (e.infra || e.tests != "passed" || !e.runtime_s) continue;
        timed.push_back({&e});
    }

    std::vector<PerfPair> pairs;
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < timed.size(); ++i) {
        for (std::size_t j = i + 1; j < timed.size(); ++j) {
            const TrajectoryEntry& base = *timed[i].entry;
            const TrajectoryEntry& opt = *timed[j].entry;
            if (base.candidate_id == opt.candidate_id) continue;  // identical normalized source
            double speedup = *base.runtime_s / *opt.runtime_s;
            if (speedup < threshold) continue;
            if (!seen.insert({base.candidate_id, opt.candidate_id}).second) continue;
            pairs.push_back({base.task_id, base.candidate_id, opt.candidate_id, base.source, opt.source,
                             *base.runtime_s, *opt.runtime_s, speedup});
        }
    }
    return pairs;
}

std::vector<ComparisonExample> build_comparison_examples(const std::vector<PerfPair>& pairs, std::uint64_t rng_seed,
                                                         std::size_t* skipped_ties) {
    Rng rng(rng_seed);
    std::vector<ComparisonExample> out;
    std::size_t ties = 0;
    for (const auto& pair : pairs) {
        if (pair.base_time_s == pair.opt_time_s) {
            ++ties;  // a label would be meaningless
            continue;
        }
        const std::string& fast = pair.opt_time_s < pair.base_time_s ? pair.opt_code : pair.base_code;
        const std::string& slow = pair.opt_time_s < pair.base_time_s ? pair.base_code : pair.opt_code;
        ComparisonExample ex;
        ex.instruction = kComparisonInstruction;
        if (rng.coin()) {
            ex.code_a = fast;
            ex.code_b = slow;
            ex.label = "A";
        } else {
            ex.code_a = slow;
            ex.code_b = fast;
            ex.label = "B";
        }
        out.push_back(std::move(ex));
    }
    if (skipped_ties) *skipped_ties = ties;
    return out;
}

// ---------------------------------------------------------------------------
// execution-log cleaning

std::vector<ExecutionLogRecord> clean_execution_logs(const std::vector<ExecutionLogRecord>& records,
                                                     const std::set<std::string>& holdout_ids, Language lang) {
    // (task, normalized code hash) -> chosen record index, pass preferred.
    std::vector<const ExecutionLogRecord*> kept;
    std::map<std::pair<std::string, std::string>, std::size_t> by_code;
    for (const auto& rec : records) {
        if (rec.status == "infra_error") continue;
        if (holdout_ids.count(rec.task_id)) continue;
        auto key = std::make_pair(rec.task_id, normalize_and_hash(rec.code, lang));
        auto it = by_code.find(key);
        if (it == by_code.end()) {
            by_code[key] = kept.size();
            kept.push_back(&rec);
        } else if (rec.status == "pass" && kept[it->second]->status != "pass") {
            kept[it->second] = &rec;
        }
    }

    // Among failures, keep one per distinct error message per task.
    std::set<std::pair<std::string, std::string>> seen_errors;
    std::vector<ExecutionLogRecord> out;
    for (const auto* rec : kept) {
        if (rec->status == "pass") {
            out.push_back(*rec);
            continue;
        }
        std::string message = rec->error_message.value_or("");
        if (!seen_errors.insert({rec->task_id, message}).second) continue;
        out.push_back(*rec);
    }
    return out;
}

// ---------------------------------------------------------------------------
// serialization

nlohmann::ordered_json to_json(const CorpusRecord& record) {
    nlohmann::ordered_json j;
    if (const auto* r = std::get_if<InstructionRecord>(&record)) {
        j["kind"] = "instruction";
        j["instruction"] = r->instruction;
        j["target_code"] = r->target_code;
        j["unit_test"] = r->unit_test;
        j["provenance"] = {{"seed_id", r->seed_id}, {"mutation_chain", r->mutation_chain},
                           {"generator_id", r->generator_id}};
        j["verified"] = r->verified;
    } else if (const auto* r = std::get_if<PerfPair>(&record)) {
        j["kind"] = "perf_pair";
        j["task_id"] = r->task_id;
        j["base_id"] = r->base_id;
        j["opt_id"] = r->opt_id;
        j["base_code"] = r->base_code;
        j["opt_code"] = r->opt_code;
        j["base_time_s"] = r->base_time_s;
        j["opt_time_s"] = r->opt_time_s;
        j["speedup"] = r->speedup;
    } else if (const auto* r = std::get_if<ComparisonExample>(&record)) {
        j["kind"] = "comparison";
        j["instruction"] = r->instruction;
        j["code_a"] = r->code_a;
        j["code_b"] = r->code_b;
        j["label"] = r->label;
    } else if (const auto* r = std::get_if<ExecutionLogRecord>(&record)) {
        j["kind"] = "execution_log";
        j["task_id"] = r->task_id;
        j["problem"] = r->problem;
        j["code"] = r->code;
        j["status"] = r->status;
        j["runtime_s"] = r->runtime_s ? nlohmann::ordered_json(*r->runtime_s) : nlohmann::ordered_json(nullptr);
        j["error_message"] =
            r->error_message ? nlohmann::ordered_json(*r->error_message) : nlohmann::ordered_json(nullptr);
    }
    return j;
}

CorpusRecord corpus_record_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "instruction") {
        InstructionRecord r;
        r.instruction = j.at("instruction").get<std::string>();
        r.target_code = j.at("target_code").get<std::string>();
        r.unit_test = j.at("unit_test").get<std::string>();
        const auto& prov = j.at("provenance");
        r.seed_id = prov.at("seed_id").get<std::string>();
        r.mutation_chain = prov.at("mutation_chain").get<std::vector<std::string>>();
        r.generator_id = prov.at("generator_id").get<std::string>();
        r.verified = j.at("verified").get<bool>();
        return r;
    }
    if (kind == "perf_pair") {
        PerfPair r;
        r.task_id = j.at("task_id").get<std::string>();
        r.base_id = j.at("base_id").get<std::string>();
        r.opt_id = j.at("opt_id").get<std::string>();
        r.base_code = j.at("base_code").get<std::string>();
        r.opt_code = j.at("opt_code").get<std::string>();
        r.base_time_s = j.at("base_time_s").get<double>();
        r.opt_time_s = j.at("opt_time_s").get<double>();
        r.speedup = j.at("speedup").get<double>();
        return r;
    }
    if (kind == "comparison") {
        ComparisonExample r;
        r.instruction = j.at("instruction").get<std::string>();
        r.code_a = j.at("code_a").get<std::string>();
        r.code_b = j.at("code_b").get<std::string>();
        r.label = j.at("label").get<std::string>();
        return r;
    }
    if (kind == "execution_log") {
        ExecutionLogRecord r;
        r.task_id = j.at("task_id").get<std::string>();
        r.problem = j.value("problem", "");
        r.code = j.at("code").get<std::string>();
        r.status = j.at("status").get<std::string>();
        if (j.contains("runtime_s") && !j.at("runtime_s").is_null()) r.runtime_s = j.at("runtime_s").get<double>();
        if (j.contains("error_message") && !j.at("error_message").is_null())
            r.error_message = j.at("error_message").get<std::string>();
        return r;
    }
    throw ParseError("unknown corpus record kind: '" + kind + "'");
}

void serialize_corpus(const std::vector<CorpusRecord>& records, const std::filesystem::path& path) {
    std::string out;
    for (const auto& record : records) {
        out += to_json(record).dump();
        out += '\n';
    }
    write_file(path, out);
}

std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read corpus: " + path.string());
    std::vector<CorpusRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(corpus_record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::set<std::string> load_holdout_ids(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read holdout list: " + path.string());
    std::set<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        if (!line.empty()) ids.insert(line);
    }
    return ids;
}

}  // namespace parevo
