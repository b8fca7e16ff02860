#ifndef PAREVO_RNG_HPP
#define PAREVO_RNG_HPP

#include <cstdint>
#include <random>

namespace parevo {

// Deterministic RNG for selection, playlist shuffles and coin flips.
// mt19937_64 has a standard-mandated sequence; the bounded draw avoids
// std::uniform_int_distribution, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, n) via rejection sampling; n must be > 0.
    std::size_t below(std::size_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

    bool coin() { return (eng_() & 1ULL) != 0; }

private:
    std::mt19937_64 eng_;
};

}  // namespace parevo

#endif
