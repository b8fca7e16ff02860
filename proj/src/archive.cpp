#include "archive.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "common.hpp"
#include "rng.hpp"
#include "vendor_json.hpp"

namespace parevo {

InsertResult Archive::insert(const FeatureDescriptor& cell, const std::string& candidate_id, double fitness,
                             int generation) {
    auto it = cells_.find(cell);
    if (it == cells_.end()) {
        cells_[cell] = {candidate_id, fitness, generation};
        return InsertResult::accepted;
    }
    ArchiveCell& cur = it->second;
    bool wins = fitness > cur.fitness ||
                (fitness == cur.fitness &&
                 (generation > cur.generation || (generation == cur.generation && candidate_id < cur.candidate_id)));
    if (!wins) return InsertResult::rejected;
    cur = {candidate_id, fitness, generation};
    return InsertResult::accepted;
}

std::optional<ArchiveCell> Archive::best_cell() const {
    std::optional<ArchiveCell> best;
    for (const auto& [desc, cell] : cells_) {
        if (!best || cell.fitness > best->fitness) best = cell;
    }
    return best;
}

void Archive::save(const std::filesystem::path& path) const {
    std::string out;
    for (const auto& [desc, cell] : cells_) {
        nlohmann::ordered_json j;
        j["cell"] = {desc.length_bin, desc.complexity_bin, desc.sync_bin};
        j["candidate_id"] = cell.candidate_id;
        j["fitness"] = cell.fitness;
        j["generation"] = cell.generation;
        out += j.dump();
        out += '\n';
    }
    write_file(path, out);
}

Archive Archive::load(const std::filesystem::path& path, FeatureConfig bins) {
    Archive archive(std::move(bins));
    std::ifstream in(path);
    if (!in) throw IoError("cannot read archive snapshot: " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        FeatureDescriptor desc{j.at("cell").at(0).get<int>(), j.at("cell").at(1).get<int>(),
                               j.at("cell").at(2).get<int>()};
        archive.cells_[desc] = {j.at("candidate_id").get<std::string>(), j.at("fitness").get<double>(),
                                j.at("generation").get<int>()};
    }
    return archive;
}

std::vector<std::string> select_survivors(const std::vector<PopulationEntry>& population, const Archive& archive,
                                          int top_k, int diverse_d, std::uint64_t rng_seed) {
    // Deduplicate by id, keeping the strongest entry per candidate.
    std::map<std::string, PopulationEntry> by_id;
    for (const auto& entry : population) {
        auto it = by_id.find(entry.id);
        if (it == by_id.end() || entry.fitness > it->second.fitness ||
            (entry.fitness == it->second.fitness && entry.generation > it->second.generation))
            by_id[entry.id] = entry;
    }
    std::vector<PopulationEntry> ranked;
    ranked.reserve(by_id.size());
    for (const auto& [id, entry] : by_id) ranked.push_back(entry);
    std::sort(ranked.begin(), ranked.end(), [](const PopulationEntry& a, const PopulationEntry& b) {
        if (a.fitness != b.fitness) return a.fitness > b.fitness;
        if (a.generation != b.generation) return a.generation > b.generation;
        return a.id < b.id;
    });

    std::vector<std::string> survivors;
    std::set<std::string> taken_ids;
    std::set<FeatureDescriptor> taken_descriptors;
    for (const auto& entry : ranked) {
        if (static_cast<int>(survivors.size()) >= top_k) break;
        survivors.push_back(entry.id);
        taken_ids.insert(entry.id);
        taken_descriptors.insert(entry.descriptor);
    }

    if (diverse_d > 0) {
        std::vector<std::pair<FeatureDescriptor, ArchiveCell>> eligible;
        for (const auto& [desc, cell] : archive.cells()) {
            if (taken_descriptors.count(desc) || taken_ids.count(cell.candidate_id)) continue;
            eligible.push_back({desc, cell});
        }
        Rng rng(rng_seed);
        int picked = 0;
        while (picked < diverse_d && !eligible.empty()) {
            std::size_t at = rng.below(eligible.size());
            const auto& [desc, cell] = eligible[at];
            survivors.push_back(cell.candidate_id);
            taken_ids.insert(cell.candidate_id);
            ++picked;
            // Drop the picked cell plus any now-ineligible entries (same id
            // held by another cell).
            std::string picked_id = cell.candidate_id;
            FeatureDescriptor picked_desc = desc;
            eligible.erase(std::remove_if(eligible.begin(), eligible.end(),
                                          [&](const auto& e) {
                                              return e.first == picked_desc || e.second.candidate_id == picked_id;
                                          }),
                           eligible.end());
        }
    }
    return survivors;
}

}  // namespace parevo
