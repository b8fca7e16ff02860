#ifndef PAREVO_CONFIG_HPP
#define PAREVO_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "text.hpp"
#include "vendor_json.hpp"

namespace parevo {

// Minimal TOML-style reader: [section] headers, key = value lines, values
// are basic strings, integers, floats, booleans or one-line arrays thereof.
// Covers task.toml and the run config file.
class ConfigFile {
public:
    static ConfigFile parse(std::string_view text, std::string origin = "<config>");
    static ConfigFile load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key, std::string fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<std::string> get_string_array(const std::string& section, const std::string& key,
                                              std::vector<std::string> fallback) const;
    std::vector<double> get_double_array(const std::string& section, const std::string& key,
                                         std::vector<double> fallback) const;

    const std::map<std::string, std::map<std::string, std::string>>& raw() const { return sections_; }

private:
    // Values stored as raw token text; typed getters parse on demand.
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::string origin_;
};

struct FeatureConfig {
    std::vector<double> length_bounds{50, 200, 800};
    std::vector<double> complexity_bounds{5, 15, 40};
    std::vector<double> sync_bounds{0.005, 0.02};  // plus the exact-zero bin
    std::vector<std::string> sync_lexicon_cxx;
    std::vector<std::string> sync_lexicon_rust;
    std::vector<std::string> sync_lexicon_other;

    FeatureConfig();

    const std::vector<std::string>& lexicon_for(Language lang) const;
    int length_bins() const { return static_cast<int>(length_bounds.size()) + 1; }
    int complexity_bins() const { return static_cast<int>(complexity_bounds.size()) + 1; }
    int sync_bins() const { return static_cast<int>(sync_bounds.size()) + 2; }
};

struct EngineConfig {
    int iterations = 10;
    int population_per_generation = 4;
    int top_k = 3;
    int diverse_d = 5;
    double epsilon_s = 1e-9;
    std::uint64_t rng_seed = 0;
    std::string prompt_template;  // must contain {problem_description} and {survivor_blocks}
    std::size_t max_prompt_bytes = 65536;

    void validate() const;
};

struct EvalConfig {
    std::string mode = "toolchain";  // or "stub"
    int jobs = 1;
    bool keep_artifacts = false;
    std::string work_root;  // empty -> per-run temp dir
    std::size_t diagnostic_tail_bytes = 4096;
    std::size_t capture_cap_bytes = 1 << 20;
    double sanitizer_time_factor = 10.0;  // sanitizer run budget = run_timeout or factor*time_limit
    bool run_race_stage = true;
    bool run_timing_stage = true;
    int critic_retries = 1;
    std::vector<std::string> race_markers{"ThreadSanitizer", "Possible data race"};
    std::vector<std::string> thread_env_vars{"PARLAY_NUM_THREADS", "OMP_NUM_THREADS", "RAYON_NUM_THREADS"};
};

struct CorpusConfig {
    double pair_threshold = 1.2;
};

struct GeneratorConfig {
    std::string base_url;
    std::string model = "default";
    std::string token_env = "PAREVO_API_TOKEN";
    long timeout_ms = 60000;
};

struct RunConfig {
    EngineConfig engine;
    EvalConfig eval;
    FeatureConfig features;
    CorpusConfig corpus;
    GeneratorConfig generator;

    static RunConfig defaults();
    static RunConfig load(const std::string& path);

    // Dotted-key override, e.g. set("evolve.iterations", "30").
    void set(const std::string& dotted_key, const std::string& value);
    std::string get(const std::string& dotted_key) const;

    nlohmann::ordered_json snapshot() const;
};

extern const char* const kDefaultPromptTemplate;

}  // namespace parevo

#endif
