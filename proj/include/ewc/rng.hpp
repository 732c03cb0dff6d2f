#pragma once

#include <cstdint>
#include <random>

namespace ewc {

// Stateless SplitMix64 step. Used for seed derivation only: it decorrelates
// nearby seed inputs before they reach the main engine.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// FNV-1a, for mapping check names to stream tags.
inline std::uint64_t fnv1a64(const char* s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (; *s; ++s) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*s));
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Seed derivation scheme (fixed, documented):
//   stream_seed = splitmix64(master_seed XOR tag)
//   seed_r      = splitmix64(stream_seed XOR replicate_index)
// Each replicate gets its own freshly seeded engine, so replicate values do
// not depend on worker scheduling.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t tag) {
    return splitmix64(master ^ tag);
}

inline std::uint64_t replicate_seed(std::uint64_t stream, std::uint64_t replicate) {
    return splitmix64(stream ^ replicate);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t stream, std::uint64_t replicate) {
    return Engine(replicate_seed(stream, replicate));
}

// Uniform in [0,1) straight from a SplitMix64 chain; used by the test-input
// generators so generated cases do not depend on library distribution details.
struct SplitMixStream {
    std::uint64_t state;

    explicit SplitMixStream(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
};

}  // namespace ewc
