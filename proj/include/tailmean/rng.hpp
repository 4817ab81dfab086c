// rng.hpp
//
// Counter-based uniform stream. A draw is a pure function of (key, index):
// the SplitMix64 finalizer applied to key + (index + 1) * golden-gamma.
// Keys for sub-streams are derived by hashing the parent seed together with
// the stream coordinates, so replication r of size s never depends on how
// many other replications or sizes exist.

#pragma once

#include <cstdint>
#include <initializer_list>

namespace tailmean::rng {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = mix64(seed + golden_gamma);
    for (std::uint64_t coord : path) key = mix64(key ^ mix64(coord + 0xD1B54A32D192ED03ULL));
    return key;
}

constexpr std::uint64_t bits(std::uint64_t key, std::uint64_t index) {
    return mix64(key + (index + 1) * golden_gamma);
}

/// Uniform on the open interval (0,1): 53 random bits, centred in their cell.
constexpr double uniform(std::uint64_t key, std::uint64_t index) {
    return (static_cast<double>(bits(key, index) >> 11) + 0.5) * 0x1.0p-53;
}

/// Sequential view over a counter stream, for call sites that just want
/// "the next uniform".
class stream {
public:
    explicit constexpr stream(std::uint64_t key) : key_(key) {}

    constexpr double next_uniform() { return uniform(key_, counter_++); }
    constexpr std::uint64_t position() const { return counter_; }
    constexpr std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace tailmean::rng
