#include "features.hpp"

#include <cctype>
#include <string>
#include <vector>

namespace parevo {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_decision_keyword(std::string_view tok, Language lang) {
    if (tok == "if" || tok == "for" || tok == "while") return true;
    switch (lang) {
        case Language::cxx_parlay: return tok == "case" || tok == "catch";
        case Language::rust_rayon: return tok == "loop";
        case Language::other: return tok == "case" || tok == "elif";
    }
    return false;
}

// A lexicon entry matches at a word-component boundary: it must start the
// identifier or follow '_', and end the identifier or be followed by '_',
// an uppercase letter or a digit. "lock_guard" and "AtomicU8" match; a
// plain "clock" does not.
bool sync_match(std::string_view ident, const std::vector<std::string>& lexicon) {
    for (const auto& entry : lexicon) {
        std::size_t at = ident.find(entry);
        while (at != std::string_view::npos) {
            bool start_ok = at == 0 || ident[at - 1] == '_';
            std::size_t end = at + entry.size();
            bool end_ok = end == ident.size() || ident[end] == '_' ||
                          std::isupper(static_cast<unsigned char>(ident[end])) ||
                          std::isdigit(static_cast<unsigned char>(ident[end]));
            if (start_ok && end_ok) return true;
            at = ident.find(entry, at + 1);
        }
    }
    return false;
}

int bin_index(double value, const std::vector<double>& upper_bounds) {
    for (std::size_t i = 0; i < upper_bounds.size(); ++i)
        if (value < upper_bounds[i]) return static_cast<int>(i);
    return static_cast<int>(upper_bounds.size());
}

}  // namespace

RawFeatures measure_source(std::string_view source, Language lang, const FeatureConfig& config) {
    std::string scrubbed = strip_comments(source, lang, {.blank_strings = true});
    const auto& lexicon = config.lexicon_for(lang);

    RawFeatures raw;
    bool line_has_content = false;
    std::size_t i = 0;
    const std::size_t n = scrubbed.size();
    while (i < n) {
        char c = scrubbed[i];
        if (c == '\n') {
            if (line_has_content) ++raw.nonblank_lines;
            line_has_content = false;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        line_has_content = true;

        if (ident_start(c)) {
            std::size_t start = i;
            while (i < n && ident_char(scrubbed[i])) ++i;
            std::string_view tok(scrubbed.data() + start, i - start);
            ++raw.total_tokens;
            if (is_decision_keyword(tok, lang)) ++raw.decision_points;
            if (sync_match(tok, lexicon)) ++raw.sync_tokens;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < n && (ident_char(scrubbed[i]) || scrubbed[i] == '.')) ++i;
            ++raw.total_tokens;
            continue;
        }
        if (c == '"' || c == '\'') {
            // Scrubbed literal: "_", counts as one opaque token.
            char quote = c;
            ++i;
            while (i < n && scrubbed[i] != quote) ++i;
            if (i < n) ++i;
            ++raw.total_tokens;
            continue;
        }

        char next = i + 1 < n ? scrubbed[i + 1] : '\0';
        if ((c == '&' && next == '&') || (c == '|' && next == '|')) {
            ++raw.total_tokens;
            ++raw.decision_points;
            i += 2;
            continue;
        }
        if (c == '=' && next == '>' && lang == Language::rust_rayon) {
            ++raw.total_tokens;
            ++raw.decision_points;  // match arm
            i += 2;
            continue;
        }
        if (c == '?' && lang == Language::cxx_parlay) {
            ++raw.total_tokens;
            ++raw.decision_points;  // ternary
            ++i;
            continue;
        }
        // Remaining punctuation: greedily take common two-char operators as
        // one token so "->" or "::" do not count twice.
        static constexpr std::string_view two_char_ops[] = {"->", "::", "<<", ">>", "==", "!=", "<=",
                                                            ">=", "+=", "-=", "*=", "/=", "=>"};
        bool took_two = false;
        for (auto op : two_char_ops) {
            if (c == op[0] && next == op[1]) {
                ++raw.total_tokens;
                i += 2;
                took_two = true;
                break;
            }
        }
        if (took_two) continue;
        ++raw.total_tokens;
        ++i;
    }
    if (line_has_content) ++raw.nonblank_lines;

    raw.sync_frequency = static_cast<double>(raw.sync_tokens) /
                         static_cast<double>(std::max<std::size_t>(1, raw.total_tokens));
    return raw;
}

FeatureDescriptor extract_features(std::string_view source, Language lang, const FeatureConfig& config) {
    RawFeatures raw = measure_source(source, lang, config);
    FeatureDescriptor d;
    d.length_bin = bin_index(static_cast<double>(raw.nonblank_lines), config.length_bounds);
    d.complexity_bin = bin_index(static_cast<double>(1 + raw.decision_points), config.complexity_bounds);
    // Dedicated bin for exactly zero synchronization, then the bounds.
    d.sync_bin = raw.sync_frequency == 0.0 ? 0 : 1 + bin_index(raw.sync_frequency, config.sync_bounds);
    return d;
}

}  // namespace parevo
