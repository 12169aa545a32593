#pragma once

#include <cmath>
#include <cstdint>

namespace pqtail {

/// splitmix64 finalizer; used both as a stand-alone mixer and to expand seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ by Blackman and Vigna. Small state, fast, and the jump-free
/// stream construction below keeps every cycle's draws independent of how
/// work is scheduled across threads.
class Xoshiro256 {
public:
    Xoshiro256() : Xoshiro256(0) {}

    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            w = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform draw strictly inside (0, 1): 53 high bits plus a half-ulp
    /// offset, so log(u) is always finite.
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Exponential draw with the given rate via inversion.
    double exponential(double rate) {
        return -std::log(uniform01()) / rate;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

/// Phase tags keep the random streams of unrelated simulation stages
/// disjoint. Every (seed, phase, sub, index) tuple names one stream.
namespace phase {
inline constexpr std::uint64_t denominator = 1;
inline constexpr std::uint64_t production = 2;
inline constexpr std::uint64_t validation_is = 3;
inline constexpr std::uint64_t validation_naive = 4;
inline constexpr std::uint64_t ce_iteration = 5;
inline constexpr std::uint64_t ce_pilot_is = 6;
inline constexpr std::uint64_t ce_pilot_naive = 7;
inline constexpr std::uint64_t presim = 8;
inline constexpr std::uint64_t profile = 9;
inline constexpr std::uint64_t bench = 10;
} // namespace phase

/// Independent generator for one unit of work (typically one regenerative
/// cycle). The key tuple is hashed, never incremented, so any worker can
/// reproduce the stream for cycle `index` without replaying its predecessors.
inline Xoshiro256 make_stream(std::uint64_t seed, std::uint64_t phase_tag,
                              std::uint64_t sub, std::uint64_t index) {
    std::uint64_t h = mix64(seed ^ 0x8c27fca3f3b1efadULL);
    h = mix64(h ^ phase_tag);
    h = mix64(h ^ sub);
    h = mix64(h ^ index);
    return Xoshiro256(h);
}

/// Derives a child seed, e.g. one per benchmark replication.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(seed ^ 0xd1b54a32d192ed03ULL) ^ a) ^ mix64(b);
}

} // namespace pqtail
