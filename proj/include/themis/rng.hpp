#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace themis {

// Seeded random source for the statistical dispatcher. mt19937_64 is a
// fully specified, portable generator; the double conversion below avoids
// std::uniform_real_distribution, whose output is implementation defined,
// so dispatch traces replay bit-exact across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection sampling keeps the draw unbiased.
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 gen_;
};

// 64-bit FNV-1a; used for consistent-hash placement. Fixed constants keep
// golden placement vectors stable.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Murmur3 finalizer. FNV-1a alone clusters on near-identical short keys
// ("server:0#1", "server:0#2", ...), which skews ring arc lengths badly;
// this scrambles the low-entropy differences across the whole word.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ull;
    x ^= x >> 33;
    return x;
}

} // namespace themis
