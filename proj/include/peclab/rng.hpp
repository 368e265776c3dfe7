#pragma once

#include <cstdint>
#include <cstring>

namespace peclab {

/// Counter-style generator built on splitmix64. Streams derived from
/// (seed, key...) are independent of evaluation order, so sweeps can be
/// labeled in parallel and still reproduce byte-identical output.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double next_in(double lo, double hi) { return lo + next_double() * (hi - lo); }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (0x9E3779B97F4A7C15ULL + (b << 6) + (b >> 2)));
    g.next_u64();
    return g.next_u64();
}

/// FNV-1a, used for config hashes, file digests and design-point keys.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xCBF29CE484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a_double(double v, std::uint64_t h = 0xCBF29CE484222325ULL) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    return fnv1a(&bits, sizeof bits, h);
}

/// Stream keyed by (seed, key): deterministic and order independent.
inline SplitMix64 derived_stream(std::uint64_t seed, std::uint64_t key) {
    return SplitMix64(mix_u64(seed, key));
}

}  // namespace peclab
