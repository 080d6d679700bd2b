#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace icld {

// SplitMix64 (Steele, Lea & Flood, 2014). The state advances by a fixed
// increment and every output is a finalizer of the state, so draw i is a pure
// function of (seed, i) -- a counter-based generator. All sampling in the
// toolkit goes through this type so artifacts reproduce bit-for-bit across
// platforms and reimplementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Bounded draw in [0, bound) via 128-bit multiply-shift (Lemire).
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    // Uniform in [0, 1) using the top 53 bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Collapses several keys into one seed. Chained SplitMix64 steps, so the
// derivation is order-sensitive and documented.
inline std::uint64_t mix_keys(std::initializer_list<std::uint64_t> keys) {
    std::uint64_t acc = 0x243F6A8885A308D3ULL;
    for (std::uint64_t k : keys) {
        SplitMix64 g(acc ^ k);
        acc = g.next();
    }
    return acc;
}

// First k positions of a Fisher-Yates shuffle of [0, n). Draws exactly k
// bounded values from rng.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, SplitMix64& rng);

}  // namespace icld
