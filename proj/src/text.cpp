#include "text.hpp"

#include <cctype>
#include <vector>

#include "common.hpp"

namespace parevo {

Language language_from_string(std::string_view name) {
    if (name == "cxx_parlay" || name == "cxx" || name == "c++") return Language::cxx_parlay;
    if (name == "rust_rayon" || name == "rust") return Language::rust_rayon;
    if (name == "other") return Language::other;
    throw ConfigError("unknown language tag: '" + std::string(name) + "'");
}

std::string_view to_string(Language lang) {
    switch (lang) {
        case Language::cxx_parlay: return "cxx_parlay";
        case Language::rust_rayon: return "rust_rayon";
        case Language::other: return "other";
    }
    return "other";
}

std::string strip_comments(std::string_view src, Language lang, ScrubOptions opts) {
    const bool nested_blocks = lang == Language::rust_rayon;
    const bool hash_line_comments = lang == Language::other;

    std::string out;
    out.reserve(src.size());

    enum class Mode { code, line_comment, block_comment, str, chr };
    Mode mode = Mode::code;
    int block_depth = 0;
    bool escaped = false;

    for (std::size_t i = 0; i < src.size(); ++i) {
        char c = src[i];
        char next = i + 1 < src.size() ? src[i + 1] : '\0';
        switch (mode) {
            case Mode::code:
                if (c == '/' && next == '/') {
                    mode = Mode::line_comment;
                    ++i;
                } else if (c == '/' && next == '*') {
                    mode = Mode::block_comment;
                    block_depth = 1;
                    out += ' ';  // token separator where the comment sat
                    ++i;
                } else if (hash_line_comments && c == '#') {
                    mode = Mode::line_comment;
                } else if (c == '"') {
                    mode = Mode::str;
                    escaped = false;
                    out += c;
                } else if (c == '\'') {
                    mode = Mode::chr;
                    escaped = false;
                    out += c;
                } else {
                    out += c;
                }
                break;
            case Mode::line_comment:
                if (c == '\n') {
                    out += '\n';
                    mode = Mode::code;
                }
                break;
            case Mode::block_comment:
                if (nested_blocks && c == '/' && next == '*') {
                    ++block_depth;
                    ++i;
                } else if (c == '*' && next == '/') {
                    if (--block_depth == 0) mode = Mode::code;
                    ++i;
                } else if (c == '\n') {
                    out += '\n';
                }
                break;
            case Mode::str:
                if (escaped) {
                    escaped = false;
                    if (!opts.blank_strings) out += c;
                } else if (c == '\\') {
                    escaped = true;
                    if (!opts.blank_strings) out += c;
                } else if (c == '"') {
                    if (opts.blank_strings) out += '_';
                    out += c;
                    mode = Mode::code;
                } else {
                    if (!opts.blank_strings) out += c;
                }
                break;
            case Mode::chr:
                // Rust lifetimes ('a) never close with a quote on the next
                // char in the patterns we care about; treat a non-escape
                // sequence longer than 2 chars as already back in code.
                if (escaped) {
                    escaped = false;
                    if (!opts.blank_strings) out += c;
                } else if (c == '\\') {
                    escaped = true;
                    if (!opts.blank_strings) out += c;
                } else if (c == '\'') {
                    if (opts.blank_strings) out += '_';
                    out += c;
                    mode = Mode::code;
                } else if (lang == Language::rust_rayon && (std::isalpha(static_cast<unsigned char>(c)) || c == '_') &&
                           next != '\'') {
                    out += c;
                    mode = Mode::code;
                } else {
                    if (!opts.blank_strings) out += c;
                }
                break;
        }
    }
    return out;
}

std::string normalize_source(std::string_view source, Language lang) {
    std::string stripped = strip_comments(source, lang);
    std::string out;
    out.reserve(stripped.size());
    bool in_space = true;  // leading whitespace trimmed
    for (char c : stripped) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out += ' ';
            in_space = false;
            out += c;
        }
    }
    return out;
}

namespace {

std::vector<std::string> judge_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    for (auto& line : lines) {
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.pop_back();
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace

bool outputs_match(std::string_view actual, std::string_view expected) {
    return judge_lines(actual) == judge_lines(expected);
}

std::string first_output_diff(std::string_view actual, std::string_view expected) {
    auto a = judge_lines(actual);
    auto e = judge_lines(expected);
    std::size_t n = std::max(a.size(), e.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::string_view got = i < a.size() ? std::string_view(a[i]) : std::string_view("<missing>");
        std::string_view want = i < e.size() ? std::string_view(e[i]) : std::string_view("<missing>");
        if (got != want) {
            std::string diff = "line " + std::to_string(i + 1) + ": expected '" + std::string(want.substr(0, 200)) +
                               "', got '" + std::string(got.substr(0, 200)) + "'";
            return diff;
        }
    }
    return {};
}

}  // namespace parevo
