#include "generator.hpp"

#include <cstdlib>
#include <filesystem>

#include "common.hpp"
#include "vendor_json.hpp"

#include <httplib.h>

namespace parevo {

namespace fs = std::filesystem;

PlaylistGenerator::PlaylistGenerator(const std::string& playlist_path) : path_(playlist_path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(playlist_path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("playlist " + playlist_path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("playlist " + playlist_path + ": expected an object of index -> [files]");

    fs::path base = fs::path(playlist_path).parent_path();
    std::size_t max_index = 0;
    for (const auto& [key, value] : j.items()) {
        std::size_t idx = 0;
        try {
            idx = static_cast<std::size_t>(std::stoul(key));
        } catch (...) {
            throw ConfigError("playlist " + playlist_path + ": non-numeric call index '" + key + "'");
        }
        max_index = std::max(max_index, idx + 1);
    }
    entries_.resize(max_index);
    for (const auto& [key, value] : j.items()) {
        std::size_t idx = static_cast<std::size_t>(std::stoul(key));
        if (!value.is_array()) throw ConfigError("playlist " + playlist_path + ": entry '" + key + "' must be an array");
        for (const auto& file : value) {
            fs::path p = file.get<std::string>();
            if (p.is_relative()) p = base / p;
            entries_[idx].push_back(read_file(p));
        }
    }
}

std::vector<std::string> PlaylistGenerator::generate(const std::string&, std::size_t n, std::uint64_t) {
    std::size_t call = next_call_++;
    if (call >= entries_.size()) return {};
    const auto& sources = entries_[call];
    if (sources.size() <= n) return sources;
    return std::vector<std::string>(sources.begin(), sources.begin() + static_cast<std::ptrdiff_t>(n));
}

HttpGenerator::HttpGenerator(GeneratorConfig config) : cfg_(std::move(config)) {
    if (cfg_.base_url.empty()) throw ConfigError("generator.base_url is empty");
}

std::vector<std::string> HttpGenerator::generate(const std::string& prompt, std::size_t n, std::uint64_t seed) {
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
    client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);

    httplib::Headers headers;
    if (!cfg_.token_env.empty()) {
        if (const char* token = std::getenv(cfg_.token_env.c_str()); token && *token)
            headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    nlohmann::json body;
    body["model"] = cfg_.model;
    body["n"] = n;
    body["seed"] = seed;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});

    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
        last_error_ = "transport error: " + httplib::to_string(res.error());
        return {};
    }
    if (res->status != 200) {
        last_error_ = "endpoint returned " + std::to_string(res->status);
        return {};
    }
    std::vector<std::string> out;
    try {
        nlohmann::json j = nlohmann::json::parse(res->body);
        for (const auto& choice : j.at("choices")) {
            std::string text = choice.at("message").at("content").get<std::string>();
            out.push_back(std::move(text));
            if (out.size() >= n) break;
        }
    } catch (const nlohmann::json::exception& e) {
        last_error_ = std::string("malformed response: ") + e.what();
        return {};
    }
    last_error_.clear();
    return out;
}

}  // namespace parevo
