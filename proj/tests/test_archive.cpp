#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "archive.hpp"
#include "test_util.hpp"

using namespace parevo;

namespace {

FeatureDescriptor desc(int a, int b, int c) { return {a, b, c}; }

std::string idn(int n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "id%04d", n);
    return buf;
}

}  // namespace

TEST_CASE("insert rules") {
    Archive archive;

    SUBCASE("empty cells take anything, even fitness zero") {
        CHECK(archive.insert(desc(0, 0, 0), "a", 0.0, 0) == InsertResult::accepted);
        CHECK(archive.cells().at(desc(0, 0, 0)).candidate_id == "a");
    }
    SUBCASE("strictly greater fitness replaces") {
        archive.insert(desc(1, 1, 1), "a", 2.0, 0);
        CHECK(archive.insert(desc(1, 1, 1), "b", 1.5, 1) == InsertResult::rejected);
        CHECK(archive.cells().at(desc(1, 1, 1)).candidate_id == "a");
        CHECK(archive.insert(desc(1, 1, 1), "c", 2.5, 1) == InsertResult::accepted);
        CHECK(archive.cells().at(desc(1, 1, 1)).candidate_id == "c");
    }
    SUBCASE("fitness ties break toward the newer generation, then smaller id") {
        archive.insert(desc(2, 0, 0), "m", 2.0, 1);
        CHECK(archive.insert(desc(2, 0, 0), "z", 2.0, 3) == InsertResult::accepted);  // newer wins
        CHECK(archive.insert(desc(2, 0, 0), "a", 2.0, 3) == InsertResult::accepted);  // same gen, smaller id
        CHECK(archive.insert(desc(2, 0, 0), "b", 2.0, 3) == InsertResult::rejected);
        CHECK(archive.insert(desc(2, 0, 0), "q", 2.0, 2) == InsertResult::rejected);  // older
        CHECK(archive.cells().at(desc(2, 0, 0)).candidate_id == "a");
    }
}

TEST_CASE("cell fitness never decreases over random insertion sequences") {
    std::mt19937_64 rng(11);
    Archive archive;
    std::map<FeatureDescriptor, double> watermark;
    for (int i = 0; i < 2000; ++i) {
        FeatureDescriptor d = desc(static_cast<int>(rng() % 4), static_cast<int>(rng() % 4),
                                   static_cast<int>(rng() % 4));
        double fitness = static_cast<double>(rng() % 1000) / 100.0;
        archive.insert(d, idn(static_cast<int>(rng() % 500)), fitness, static_cast<int>(rng() % 30));
        double now = archive.cells().at(d).fitness;
        auto it = watermark.find(d);
        if (it != watermark.end()) CHECK(now >= it->second);
        watermark[d] = now;
    }
    CHECK(archive.size() <= 64);
}

TEST_CASE("snapshot round trip") {
    Archive archive;
    archive.insert(desc(0, 1, 2), "abc", 1.25, 3);
    archive.insert(desc(3, 3, 3), "xyz", 0.0, 0);
    test_util::TempDir dir("arch");
    archive.save(dir / "archive.snapshot");
    Archive back = Archive::load(dir / "archive.snapshot");
    REQUIRE(back.size() == 2);
    CHECK(back.cells().at(desc(0, 1, 2)).candidate_id == "abc");
    CHECK(back.cells().at(desc(0, 1, 2)).fitness == 1.25);
    CHECK(back.cells().at(desc(3, 3, 3)).generation == 0);
}

TEST_CASE("survivor selection") {
    SUBCASE("top-k then disjoint diverse picks") {
        std::vector<PopulationEntry> population;
        Archive archive;
        for (int i = 0; i < 10; ++i) {
            PopulationEntry e{idn(i), 1.0 + i, i % 3, desc(i % 4, (i / 4) % 4, 0)};
            population.push_back(e);
        }
        // Archive with 12 distinct cells holding their own elites.
        for (int i = 0; i < 12; ++i) archive.insert(desc(i % 4, (i / 4) % 4, 1), idn(100 + i), 0.5, 0);

        auto survivors = select_survivors(population, archive, 3, 5, 99);
        REQUIRE(survivors.size() == 8);
        CHECK(survivors[0] == idn(9));
        CHECK(survivors[1] == idn(8));
        CHECK(survivors[2] == idn(7));
        std::set<std::string> distinct(survivors.begin(), survivors.end());
        CHECK(distinct.size() == survivors.size());

        // Diverse picks come from cells whose descriptors differ from the
        // top-k candidates' descriptors.
        std::set<FeatureDescriptor> topk_desc{population[9].descriptor, population[8].descriptor,
                                              population[7].descriptor};
        for (std::size_t i = 3; i < survivors.size(); ++i) {
            FeatureDescriptor d{};
            bool found = false;
            for (const auto& [cell, elite] : archive.cells()) {
                if (elite.candidate_id == survivors[i]) {
                    d = cell;
                    found = true;
                }
            }
            REQUIRE(found);
            CHECK(topk_desc.count(d) == 0);
        }
    }
    SUBCASE("cannot exceed the distinct population") {
        std::vector<PopulationEntry> two{{"a", 1.0, 0, desc(0, 0, 0)}, {"b", 2.0, 0, desc(1, 0, 0)}};
        auto survivors = select_survivors(two, Archive{}, 3, 5, 1);
        CHECK(survivors.size() == 2);
        CHECK(survivors[0] == "b");
    }
    SUBCASE("all-zero fitness still selects deterministically") {
        std::vector<PopulationEntry> population;
        Archive archive;
        for (int i = 0; i < 6; ++i) {
            population.push_back({idn(i), 0.0, i, desc(i % 4, 0, 0)});
            archive.insert(desc(i % 4, 1 + i % 3, 0), idn(50 + i), 0.0, i);
        }
        auto a = select_survivors(population, archive, 3, 5, 7);
        auto b = select_survivors(population, archive, 3, 5, 7);
        CHECK(a == b);
        CHECK(a[0] == idn(5));  // ties resolve toward the newer generation
    }
    SUBCASE("duplicate population ids collapse") {
        std::vector<PopulationEntry> population{{"a", 1.0, 0, desc(0, 0, 0)},
                                                {"a", 1.0, 0, desc(0, 0, 0)},
                                                {"b", 0.5, 0, desc(1, 0, 0)}};
        auto survivors = select_survivors(population, Archive{}, 3, 0, 1);
        CHECK(survivors.size() == 2);
    }
}

TEST_CASE("selection determinism and disjointness over random instances") {
    std::mt19937_64 rng(313);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<PopulationEntry> population;
        Archive archive;
        int pop_n = 1 + static_cast<int>(rng() % 12);
        for (int i = 0; i < pop_n; ++i)
            population.push_back({idn(static_cast<int>(rng() % 40)), static_cast<double>(rng() % 50) / 7.0,
                                  static_cast<int>(rng() % 5),
                                  desc(static_cast<int>(rng() % 4), static_cast<int>(rng() % 4),
                                       static_cast<int>(rng() % 4))});
        int cells = static_cast<int>(rng() % 20);
        for (int i = 0; i < cells; ++i)
            archive.insert(desc(static_cast<int>(rng() % 4), static_cast<int>(rng() % 4),
                                static_cast<int>(rng() % 4)),
                           idn(static_cast<int>(rng() % 40)), static_cast<double>(rng() % 50) / 9.0,
                           static_cast<int>(rng() % 5));
        std::uint64_t seed = rng();

        auto s1 = select_survivors(population, archive, 3, 5, seed);
        auto s2 = select_survivors(population, archive, 3, 5, seed);
        CHECK(s1 == s2);
        CHECK(s1.size() <= 8);
        std::set<std::string> distinct(s1.begin(), s1.end());
        CHECK(distinct.size() == s1.size());
    }
}
