#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace qtomo {

// All randomness in the library flows through mt19937_64 engines seeded by
// the helpers below, so results are reproducible bit for bit across runs
// and independent of scheduling order.

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Engine for one logical stream, identified by a master seed plus a label.
// Streams with different labels are independent regardless of creation order.
inline std::mt19937_64 seeded_engine(std::uint64_t master_seed, std::string_view label) {
    return std::mt19937_64(splitmix64(master_seed ^ fnv1a64(label)));
}

// Uniform double in [0, 1) with the standard-pinned mt19937_64 sequence;
// avoids std::uniform_real_distribution, whose mapping is not portable.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(std::mt19937_64& eng, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01(eng) < p;
}

// Uniform integer in [0, bound) without modulo bias.
inline std::uint64_t uniform_below(std::mt19937_64& eng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t x = eng();
    while (x >= limit) x = eng();
    return x % bound;
}

}  // namespace qtomo
