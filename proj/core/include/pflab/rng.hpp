#pragma once

#include <cstdint>

namespace pflab {

// SplitMix64: tiny, fast, and statistically solid for experiment seeding.
// Reference constants from Steele, Lea & Flood, "Fast Splittable
// Pseudorandom Number Generators".
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform draw from [0, bound) via rejection; bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        // threshold = 2^64 mod bound, rejected to kill modulo bias
        const std::uint64_t threshold = -bound % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

private:
    std::uint64_t state_;
};

// Derives the sub-seed for one instance of a seeded batch. Mixing instead
// of adding keeps neighbouring instances decorrelated, and makes results
// a pure function of (master seed, index) regardless of worker count.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) noexcept {
    SplitMix64 g(master ^ (0x632be59bd9b4e019ULL + index * 0x9e3779b97f4a7c15ULL));
    g.next();
    return g.next();
}

} // namespace pflab
