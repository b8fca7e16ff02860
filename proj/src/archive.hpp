#ifndef PAREVO_ARCHIVE_HPP
#define PAREVO_ARCHIVE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "features.hpp"

namespace parevo {

struct ArchiveCell {
    std::string candidate_id;
    double fitness = 0.0;
    int generation = 0;
};

enum class InsertResult { accepted, rejected };

// MAP-Elites grid over (code length, cyclomatic complexity, sync frequency)
// bins. One elite per cell; cell fitness never decreases.
class Archive {
public:
    Archive() = default;
    explicit Archive(FeatureConfig bins) : bins_(std::move(bins)) {}

    // Empty cells accept anything, including fitness-0 candidates (their
    // diagnostics stay reachable for diverse selection). Occupied cells are
    // replaced on strictly greater fitness; ties go to the newer generation,
    // then the lexicographically smaller id.
    InsertResult insert(const FeatureDescriptor& cell, const std::string& candidate_id, double fitness,
                        int generation);

    const std::map<FeatureDescriptor, ArchiveCell>& cells() const { return cells_; }
    const FeatureConfig& bins() const { return bins_; }
    std::size_t size() const { return cells_.size(); }
    std::optional<ArchiveCell> best_cell() const;

    // Line-delimited snapshot: {"cell":[l,c,s],"candidate_id":..,"fitness":..,"generation":..}
    void save(const std::filesystem::path& path) const;
    static Archive load(const std::filesystem::path& path, FeatureConfig bins = {});

private:
    std::map<FeatureDescriptor, ArchiveCell> cells_;
    FeatureConfig bins_;
};

struct PopulationEntry {
    std::string id;
    double fitness = 0.0;
    int generation = 0;
    FeatureDescriptor descriptor;
};

// Survivor selection: top-k distinct ids by fitness (ties to the newer
// generation, then smaller id) followed by up to d archive elites sampled
// uniformly (seeded) from cells whose descriptors differ from everything
// already selected. Fully deterministic given the seed.
std::vector<std::string> select_survivors(const std::vector<PopulationEntry>& population, const Archive& archive,
                                          int top_k, int diverse_d, std::uint64_t rng_seed);

}  // namespace parevo

#endif
