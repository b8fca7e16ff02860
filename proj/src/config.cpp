#include "config.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>

#include "common.hpp"

namespace parevo {

const char* const kDefaultPromptTemplate =
    "You are an expert C++ competitive programmer. Your task is to write a \n"
    "COMPLETE, CORRECT, and FAST C++ solution.\n"
    "\n"
    "PROBLEM:\n"
    "{problem_description}\n"
    "\n"
    "REQUIREMENTS:\n"
    "Write a complete C++ parallel program that compiles and runs correctly\n"
    "Read input from standard input (cin)\n"
    "Write output to standard output (cout)\n"
    "Handle all edge cases mentioned in the problem\n"
    "Optimize for speed - use efficient algorithms and data structures\n"
    "Use C++ STL where appropriate (vector, map, set, priority_queue, etc.)\n"
    "Consider time complexity and space complexity\n"
    "The parlay library MUST be used as the core computation of the program\n"
    "\n"
    "AVAILABLE LIBRARIES:\n"
    "Standard C++ libraries (iostream, algorithm, vector, map, etc.)\n"
    "The parlay library\n"
    "\n"
    "Note:\n"
    "parlay::parallel_for does not guarantee ordering, do not use it with IO operations.\n"
    "\n"
    "CODE STYLE:\n"
    "Use C++ style comments: // for single line, /* */ for multi-line\n"
    "Do NOT use Python-style # comments\n"
    "Comments should be simple and short\n"
    "Include necessary headers\n"
    "Write clean, readable code\n"
    "\n"
    "OUTPUT FORMAT:\n"
    "Return ONLY the complete C++ code. Do not include explanations, \n"
    "markdown formatting, or code blocks.\n"
    "Just the raw C++ source code that can be directly compiled.\n"
    "{survivor_blocks}";

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Cuts a trailing # comment, respecting quotes.
std::string_view cut_comment(std::string_view line) {
    bool in_str = false;
    char quote = 0;
    bool escaped = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_str) {
            if (escaped)
                escaped = false;
            else if (c == '\\' && quote == '"')
                escaped = true;
            else if (c == quote)
                in_str = false;
        } else if (c == '"' || c == '\'') {
            in_str = true;
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string unquote(const std::string& raw, const std::string& where) {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
        std::string out;
        for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
            char c = raw[i];
            if (c == '\\' && i + 2 < raw.size() + 1) {
                char n = raw[++i];
                switch (n) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: throw ParseError(where + ": unsupported escape '\\" + std::string(1, n) + "'");
                }
            } else {
                out += c;
            }
        }
        return out;
    }
    if (raw.size() >= 2 && raw.front() == '\'' && raw.back() == '\'') return raw.substr(1, raw.size() - 2);
    return raw;  // bare token
}

std::vector<std::string> split_array(const std::string& raw, const std::string& where) {
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']')
        throw ParseError(where + ": expected an array [..]");
    std::vector<std::string> items;
    std::string cur;
    bool in_str = false;
    char quote = 0;
    bool escaped = false;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        char c = raw[i];
        if (in_str) {
            cur += c;
            if (escaped)
                escaped = false;
            else if (c == '\\' && quote == '"')
                escaped = true;
            else if (c == quote)
                in_str = false;
        } else if (c == '"' || c == '\'') {
            in_str = true;
            quote = c;
            cur += c;
        } else if (c == ',') {
            if (!trim(cur).empty()) items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    return items;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text, std::string origin) {
    ConfigFile cfg;
    cfg.origin_ = std::move(origin);
    std::string section;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view raw_line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        std::string line = trim(cut_comment(raw_line));
        if (line.empty()) continue;
        std::string where = cfg.origin_ + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(where + ": unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) throw ParseError(where + ": empty section name");
            cfg.sections_[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(where + ": expected key = value");
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ParseError(where + ": empty key");
        if (value.empty()) throw ParseError(where + ": empty value for '" + key + "'");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) { return parse(read_file(path), path); }

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key, std::string fallback) const {
    if (!has(section, key)) return fallback;
    return unquote(sections_.at(section).at(key), origin_ + " [" + section + "]." + key);
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key, std::int64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& raw = sections_.at(section).at(key);
    std::int64_t v = 0;
    auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size())
        throw ParseError(origin_ + " [" + section + "]." + key + ": expected integer, got '" + raw + "'");
    return v;
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& raw = sections_.at(section).at(key);
    try {
        return parse_double(raw);
    } catch (const ParseError&) {
        throw ParseError(origin_ + " [" + section + "]." + key + ": expected number, got '" + raw + "'");
    }
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& raw = sections_.at(section).at(key);
    if (raw == "true") return true;
    if (raw == "false") return false;
    throw ParseError(origin_ + " [" + section + "]." + key + ": expected true/false, got '" + raw + "'");
}

std::vector<std::string> ConfigFile::get_string_array(const std::string& section, const std::string& key,
                                                      std::vector<std::string> fallback) const {
    if (!has(section, key)) return fallback;
    std::string where = origin_ + " [" + section + "]." + key;
    std::vector<std::string> out;
    for (const auto& item : split_array(sections_.at(section).at(key), where)) out.push_back(unquote(item, where));
    return out;
}

std::vector<double> ConfigFile::get_double_array(const std::string& section, const std::string& key,
                                                 std::vector<double> fallback) const {
    if (!has(section, key)) return fallback;
    std::string where = origin_ + " [" + section + "]." + key;
    std::vector<double> out;
    for (const auto& item : split_array(sections_.at(section).at(key), where)) {
        try {
            out.push_back(parse_double(item));
        } catch (const ParseError&) {
            throw ParseError(where + ": expected number, got '" + item + "'");
        }
    }
    return out;
}

FeatureConfig::FeatureConfig() {
    sync_lexicon_cxx = {"atomic",         "mutex",     "lock",      "unlock",   "compare_exchange",
                        "fetch_add",      "fetch_sub", "fetch_or",  "fetch_and", "fetch_xor",
                        "memory_order",   "fence",     "condition_variable",    "semaphore",
                        "barrier",        "latch",     "critical"};
    sync_lexicon_rust = {"Atomic",   "Mutex",     "RwLock",    "Condvar",  "Barrier",          "Ordering",
                         "fence",    "lock",      "unlock",    "fetch_add", "fetch_sub",       "fetch_or",
                         "fetch_and", "fetch_xor", "compare_exchange"};
    sync_lexicon_other = {"atomic", "mutex", "lock", "unlock", "fence", "semaphore", "barrier", "compare_exchange",
                          "fetch_add"};
}

const std::vector<std::string>& FeatureConfig::lexicon_for(Language lang) const {
    switch (lang) {
        case Language::cxx_parlay: return sync_lexicon_cxx;
        case Language::rust_rayon: return sync_lexicon_rust;
        case Language::other: return sync_lexicon_other;
    }
    return sync_lexicon_other;
}

void EngineConfig::validate() const {
    if (iterations < 0) throw ConfigError("evolve.iterations must be >= 0");
    if (population_per_generation < 1) throw ConfigError("evolve.population_per_generation must be >= 1");
    if (top_k < 0 || diverse_d < 0) throw ConfigError("evolve.k and evolve.d must be >= 0");
    if (top_k + diverse_d < 1) throw ConfigError("evolve.k + evolve.d must be >= 1");
    if (epsilon_s <= 0) throw ConfigError("evolve.epsilon_s must be > 0");
    if (max_prompt_bytes < 256) throw ConfigError("evolve.max_prompt_bytes must be >= 256");
    if (prompt_template.find("{problem_description}") == std::string::npos)
        throw ConfigError("prompt template missing {problem_description} placeholder");
    if (prompt_template.find("{survivor_blocks}") == std::string::npos)
        throw ConfigError("prompt template missing {survivor_blocks} placeholder");
}

RunConfig RunConfig::defaults() {
    RunConfig cfg;
    cfg.engine.prompt_template = kDefaultPromptTemplate;
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    RunConfig cfg = defaults();
    ConfigFile file = ConfigFile::load(path);

    cfg.engine.iterations = static_cast<int>(file.get_int("evolve", "iterations", cfg.engine.iterations));
    cfg.engine.population_per_generation = static_cast<int>(
        file.get_int("evolve", "population_per_generation", cfg.engine.population_per_generation));
    cfg.engine.top_k = static_cast<int>(file.get_int("evolve", "k", cfg.engine.top_k));
    cfg.engine.diverse_d = static_cast<int>(file.get_int("evolve", "d", cfg.engine.diverse_d));
    cfg.engine.epsilon_s = file.get_double("evolve", "epsilon_s", cfg.engine.epsilon_s);
    cfg.engine.rng_seed = static_cast<std::uint64_t>(file.get_int("evolve", "rng_seed", 0));
    cfg.engine.max_prompt_bytes =
        static_cast<std::size_t>(file.get_int("evolve", "max_prompt_bytes", static_cast<std::int64_t>(cfg.engine.max_prompt_bytes)));
    if (file.has("evolve", "prompt_template")) {
        cfg.engine.prompt_template = file.get_string("evolve", "prompt_template", cfg.engine.prompt_template);
    } else if (file.has("evolve", "prompt_template_file")) {
        auto rel = file.get_string("evolve", "prompt_template_file", "");
        auto base = std::filesystem::path(path).parent_path();
        cfg.engine.prompt_template = read_file(base / rel);
    }

    cfg.eval.mode = file.get_string("evaluation", "mode", cfg.eval.mode);
    cfg.eval.jobs = static_cast<int>(file.get_int("evaluation", "jobs", cfg.eval.jobs));
    cfg.eval.keep_artifacts = file.get_bool("evaluation", "keep_artifacts", cfg.eval.keep_artifacts);
    cfg.eval.work_root = file.get_string("evaluation", "work_root", cfg.eval.work_root);
    cfg.eval.diagnostic_tail_bytes = static_cast<std::size_t>(
        file.get_int("evaluation", "diagnostic_tail_bytes", static_cast<std::int64_t>(cfg.eval.diagnostic_tail_bytes)));
    cfg.eval.capture_cap_bytes = static_cast<std::size_t>(
        file.get_int("evaluation", "capture_cap_bytes", static_cast<std::int64_t>(cfg.eval.capture_cap_bytes)));
    cfg.eval.sanitizer_time_factor =
        file.get_double("evaluation", "sanitizer_time_factor", cfg.eval.sanitizer_time_factor);
    cfg.eval.run_race_stage = file.get_bool("evaluation", "run_race_stage", cfg.eval.run_race_stage);
    cfg.eval.run_timing_stage = file.get_bool("evaluation", "run_timing_stage", cfg.eval.run_timing_stage);
    cfg.eval.critic_retries = static_cast<int>(file.get_int("evaluation", "critic_retries", cfg.eval.critic_retries));
    cfg.eval.race_markers = file.get_string_array("evaluation", "race_markers", cfg.eval.race_markers);
    cfg.eval.thread_env_vars = file.get_string_array("evaluation", "thread_env_vars", cfg.eval.thread_env_vars);

    cfg.features.length_bounds = file.get_double_array("features", "length_bounds", cfg.features.length_bounds);
    cfg.features.complexity_bounds =
        file.get_double_array("features", "complexity_bounds", cfg.features.complexity_bounds);
    cfg.features.sync_bounds = file.get_double_array("features", "sync_bounds", cfg.features.sync_bounds);
    cfg.features.sync_lexicon_cxx =
        file.get_string_array("features", "sync_lexicon_cxx", cfg.features.sync_lexicon_cxx);
    cfg.features.sync_lexicon_rust =
        file.get_string_array("features", "sync_lexicon_rust", cfg.features.sync_lexicon_rust);
    cfg.features.sync_lexicon_other =
        file.get_string_array("features", "sync_lexicon_other", cfg.features.sync_lexicon_other);

    cfg.corpus.pair_threshold = file.get_double("corpus", "pair_threshold", cfg.corpus.pair_threshold);

    cfg.generator.base_url = file.get_string("generator", "base_url", cfg.generator.base_url);
    cfg.generator.model = file.get_string("generator", "model", cfg.generator.model);
    cfg.generator.token_env = file.get_string("generator", "token_env", cfg.generator.token_env);
    cfg.generator.timeout_ms = file.get_int("generator", "timeout_ms", cfg.generator.timeout_ms);

    cfg.engine.validate();
    return cfg;
}

namespace {

std::int64_t to_int(const std::string& key, const std::string& value) {
    std::int64_t v = 0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw ConfigError(key + ": expected integer, got '" + value + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(key + ": expected boolean, got '" + value + "'");
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : value) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "evolve.iterations") engine.iterations = static_cast<int>(to_int(key, value));
    else if (key == "evolve.population_per_generation" || key == "evolve.population")
        engine.population_per_generation = static_cast<int>(to_int(key, value));
    else if (key == "evolve.k") engine.top_k = static_cast<int>(to_int(key, value));
    else if (key == "evolve.d") engine.diverse_d = static_cast<int>(to_int(key, value));
    else if (key == "evolve.epsilon_s") engine.epsilon_s = parse_double(value);
    else if (key == "evolve.rng_seed" || key == "evolve.seed")
        engine.rng_seed = static_cast<std::uint64_t>(to_int(key, value));
    else if (key == "evolve.max_prompt_bytes") engine.max_prompt_bytes = static_cast<std::size_t>(to_int(key, value));
    else if (key == "evolve.prompt_template") engine.prompt_template = value;
    else if (key == "evolve.prompt_template_file") engine.prompt_template = read_file(value);
    else if (key == "evaluation.mode") eval.mode = value;
    else if (key == "evaluation.jobs") eval.jobs = static_cast<int>(to_int(key, value));
    else if (key == "evaluation.keep_artifacts") eval.keep_artifacts = to_bool(key, value);
    else if (key == "evaluation.work_root") eval.work_root = value;
    else if (key == "evaluation.diagnostic_tail_bytes")
        eval.diagnostic_tail_bytes = static_cast<std::size_t>(to_int(key, value));
    else if (key == "evaluation.capture_cap_bytes")
        eval.capture_cap_bytes = static_cast<std::size_t>(to_int(key, value));
    else if (key == "evaluation.sanitizer_time_factor") eval.sanitizer_time_factor = parse_double(value);
    else if (key == "evaluation.run_race_stage") eval.run_race_stage = to_bool(key, value);
    else if (key == "evaluation.run_timing_stage") eval.run_timing_stage = to_bool(key, value);
    else if (key == "evaluation.critic_retries") eval.critic_retries = static_cast<int>(to_int(key, value));
    else if (key == "evaluation.race_markers") eval.race_markers = split_csv(value);
    else if (key == "evaluation.thread_env_vars") eval.thread_env_vars = split_csv(value);
    else if (key == "corpus.pair_threshold") corpus.pair_threshold = parse_double(value);
    else if (key == "generator.base_url") generator.base_url = value;
    else if (key == "generator.model") generator.model = value;
    else if (key == "generator.token_env") generator.token_env = value;
    else if (key == "generator.timeout_ms") generator.timeout_ms = to_int(key, value);
    else throw ConfigError("unknown config key: '" + key + "'");
}

std::string RunConfig::get(const std::string& key) const {
    if (key == "evolve.iterations") return std::to_string(engine.iterations);
    if (key == "evolve.population_per_generation") return std::to_string(engine.population_per_generation);
    if (key == "evolve.k") return std::to_string(engine.top_k);
    if (key == "evolve.d") return std::to_string(engine.diverse_d);
    if (key == "evolve.epsilon_s") return format_double(engine.epsilon_s);
    if (key == "evolve.rng_seed") return std::to_string(engine.rng_seed);
    if (key == "evolve.max_prompt_bytes") return std::to_string(engine.max_prompt_bytes);
    if (key == "evaluation.mode") return eval.mode;
    if (key == "evaluation.jobs") return std::to_string(eval.jobs);
    if (key == "evaluation.keep_artifacts") return eval.keep_artifacts ? "true" : "false";
    if (key == "evaluation.work_root") return eval.work_root;
    if (key == "corpus.pair_threshold") return format_double(corpus.pair_threshold);
    if (key == "generator.base_url") return generator.base_url;
    if (key == "generator.model") return generator.model;
    if (key == "generator.token_env") return generator.token_env;
    if (key == "generator.timeout_ms") return std::to_string(generator.timeout_ms);
    throw ConfigError("unknown config key: '" + key + "'");
}

nlohmann::ordered_json RunConfig::snapshot() const {
    nlohmann::ordered_json j;
    j["evolve"] = {{"iterations", engine.iterations},
                   {"population_per_generation", engine.population_per_generation},
                   {"k", engine.top_k},
                   {"d", engine.diverse_d},
                   {"epsilon_s", engine.epsilon_s},
                   {"rng_seed", engine.rng_seed},
                   {"max_prompt_bytes", engine.max_prompt_bytes},
                   {"prompt_template", engine.prompt_template}};
    j["evaluation"] = {{"mode", eval.mode},
                       {"jobs", eval.jobs},
                       {"keep_artifacts", eval.keep_artifacts},
                       {"work_root", eval.work_root},
                       {"diagnostic_tail_bytes", eval.diagnostic_tail_bytes},
                       {"capture_cap_bytes", eval.capture_cap_bytes},
                       {"sanitizer_time_factor", eval.sanitizer_time_factor},
                       {"run_race_stage", eval.run_race_stage},
                       {"run_timing_stage", eval.run_timing_stage},
                       {"critic_retries", eval.critic_retries},
                       {"race_markers", eval.race_markers},
                       {"thread_env_vars", eval.thread_env_vars}};
    j["features"] = {{"length_bounds", features.length_bounds},
                     {"complexity_bounds", features.complexity_bounds},
                     {"sync_bounds", features.sync_bounds},
                     {"sync_lexicon_cxx", features.sync_lexicon_cxx},
                     {"sync_lexicon_rust", features.sync_lexicon_rust},
                     {"sync_lexicon_other", features.sync_lexicon_other}};
    j["corpus"] = {{"pair_threshold", corpus.pair_threshold}};
    j["generator"] = {{"base_url", generator.base_url},
                      {"model", generator.model},
                      {"token_env", generator.token_env},
                      {"timeout_ms", generator.timeout_ms}};
    return j;
}

}  // namespace parevo
