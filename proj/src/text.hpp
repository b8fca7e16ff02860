#ifndef PAREVO_TEXT_HPP
#define PAREVO_TEXT_HPP

#include <string>
#include <string_view>

namespace parevo {

enum class Language { cxx_parlay, rust_rayon, other };

Language language_from_string(std::string_view name);
std::string_view to_string(Language lang);

struct ScrubOptions {
    // Replace string/char literal bodies with a single placeholder character.
    // Used by feature extraction so keywords inside literals are not counted;
    // identity hashing keeps literals intact.
    bool blank_strings = false;
};

// Removes comments for the language's line/block syntaxes while preserving
// newlines (a comment-only line becomes blank). Rust block comments nest;
// the generic language additionally treats '#' as a line comment.
std::string strip_comments(std::string_view source, Language lang, ScrubOptions opts = {});

// strip_comments + collapse whitespace runs to single spaces + trim.
std::string normalize_source(std::string_view source, Language lang);

// Judge-style output comparison: per-line trailing-whitespace trim, trailing
// blank lines dropped, then byte-exact.
bool outputs_match(std::string_view actual, std::string_view expected);

// First differing line rendered as a short diagnostic, empty if equal.
std::string first_output_diff(std::string_view actual, std::string_view expected);

}  // namespace parevo

#endif
