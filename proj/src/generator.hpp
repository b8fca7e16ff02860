#ifndef PAREVO_GENERATOR_HPP
#define PAREVO_GENERATOR_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "config.hpp"

namespace parevo {

// The LLM seam. Implementations return at most `n` source texts; returning
// fewer (or none) signals provider failure, which the engine tolerates.
class CandidateGenerator {
public:
    virtual ~CandidateGenerator() = default;
    virtual std::vector<std::string> generate(const std::string& prompt, std::size_t n, std::uint64_t seed) = 0;
    virtual std::string id() const = 0;
};

// Deterministic mock: a playlist JSON file maps call index -> source files.
//   {"0": ["gen0_a.src", "gen0_b.src"], "1": ["gen1.src"]}
// Paths are relative to the playlist file. Each generate() call consumes the
// next index; missing indices yield an empty generation.
class PlaylistGenerator : public CandidateGenerator {
public:
    explicit PlaylistGenerator(const std::string& playlist_path);

    std::vector<std::string> generate(const std::string& prompt, std::size_t n, std::uint64_t seed) override;
    std::string id() const override { return "mock:" + path_; }

private:
    std::string path_;
    std::vector<std::vector<std::string>> entries_;  // call index -> sources
    std::size_t next_call_ = 0;
};

// Test helper: wraps a lambda.
class FunctionGenerator : public CandidateGenerator {
public:
    using Fn = std::function<std::vector<std::string>(const std::string&, std::size_t, std::uint64_t)>;
    FunctionGenerator(Fn fn, std::string name = "callback") : fn_(std::move(fn)), name_(std::move(name)) {}

    std::vector<std::string> generate(const std::string& prompt, std::size_t n, std::uint64_t seed) override {
        return fn_(prompt, n, seed);
    }
    std::string id() const override { return name_; }

private:
    Fn fn_;
    std::string name_;
};

// Thin chat-completions client. POSTs {model, n, seed, messages:[{role:
// "user", content: prompt}]} to <base_url>/v1/chat/completions and collects
// choices[].message.content. Any transport or schema error yields an empty
// generation; the engine logs and carries on with stale survivors.
class HttpGenerator : public CandidateGenerator {
public:
    HttpGenerator(GeneratorConfig config);

    std::vector<std::string> generate(const std::string& prompt, std::size_t n, std::uint64_t seed) override;
    std::string id() const override { return "endpoint:" + cfg_.base_url + "#" + cfg_.model; }
    const std::string& last_error() const { return last_error_; }

private:
    GeneratorConfig cfg_;
    std::string last_error_;
};

}  // namespace parevo

#endif
