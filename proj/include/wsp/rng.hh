#pragma once

#include <cstdint>
#include <initializer_list>

namespace wsp
{
    // SplitMix64 (Steele, Lea, Vigna; public-domain reference implementation).
    // Chosen because its output stream is fully specified by the algorithm,
    // so equal seeds give equal instances on every platform and toolchain.
    // Reference outputs from seed 0: 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, ...
    struct Rng
    {
        std::uint64_t state;

        explicit Rng(std::uint64_t seed) : state(seed) {}

        auto next() -> std::uint64_t
        {
            std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            return z ^ (z >> 31);
        }

        // uniform draw from {0, ..., bound-1}; modulo rejection keeps it unbiased
        auto below(std::uint64_t bound) -> std::uint64_t
        {
            std::uint64_t threshold = (0 - bound) % bound;
            for (;;) {
                std::uint64_t r = next();
                if (r >= threshold)
                    return r % bound;
            }
        }
    };

    // SplitMix64 finalizer as a standalone hash step.
    inline auto mix64(std::uint64_t z) -> std::uint64_t
    {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Per-task seed derivation: fold each field into the running hash with the
    // SplitMix64 finalizer. Every experiment task derives its instance seed as
    // derive_seed(master, {k, n, e, gamma, replicate}), so a task's randomness
    // depends only on its own key, never on scheduling or worker count.
    inline auto derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> fields) -> std::uint64_t
    {
        std::uint64_t h = mix64(master + 0x9E3779B97F4A7C15ULL);
        for (auto f : fields)
            h = mix64(h ^ (f + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
        return h;
    }
}
