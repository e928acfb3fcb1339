#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace belief {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// xoshiro256** engine. Satisfies UniformRandomBitGenerator, so it plugs into
/// the <random> distributions. Cheap to construct, which matters because every
/// bootstrap/permutation replicate gets its own substream.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n) by multiply-shift; bias is at most n / 2^64.
    std::uint64_t below(std::uint64_t n) {
        const __uint128_t m = static_cast<__uint128_t>((*this)()) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool coin() { return ((*this)() >> 63) != 0; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4]{};
};

/// Derives an independent stream from a root seed and a path of indices, e.g.
/// substream(seed, {replicate}) or substream(seed, {sample_size, replicate}).
inline Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = seed ^ 0x6a09e667f3bcc909ULL;
    std::uint64_t key = splitmix64(state);
    for (std::uint64_t id : path) {
        state = key ^ (id * 0x9e3779b97f4a7c15ULL);
        key = splitmix64(state);
    }
    return Rng(key);
}

}  // namespace belief
