#ifndef PAREVO_FEATURES_HPP
#define PAREVO_FEATURES_HPP

#include <compare>
#include <cstddef>
#include <string_view>

#include "config.hpp"
#include "text.hpp"

namespace parevo {

struct FeatureDescriptor {
    int length_bin = 0;
    int complexity_bin = 0;
    int sync_bin = 0;

    auto operator<=>(const FeatureDescriptor&) const = default;
};

struct RawFeatures {
    std::size_t nonblank_lines = 0;    // after comment stripping
    std::size_t decision_points = 0;   // complexity = 1 + decision_points
    std::size_t total_tokens = 0;
    std::size_t sync_tokens = 0;
    double sync_frequency = 0.0;       // sync_tokens / max(1, total_tokens)
};

// Pure token-level measurement; string literal bodies are excluded so
// keywords inside text do not count as control flow.
RawFeatures measure_source(std::string_view source, Language lang, const FeatureConfig& config);

FeatureDescriptor extract_features(std::string_view source, Language lang, const FeatureConfig& config);

}  // namespace parevo

#endif
