#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace swstab {

/// SplitMix64 output function; used both to mix seeds and to derive
/// independent per-replica stream seeds from (master seed, stream index).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t salt) {
    return mix64(seed ^ mix64(salt + 0x632BE59BD9B4E019ULL));
}

/// One replica's random stream. Streams derived from the same (master, index)
/// pair are identical regardless of thread scheduling, and draws are produced
/// by hand-rolled inverse transforms so results do not depend on the standard
/// library's distribution internals.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : engine_(mix64(master_seed, stream_index)) {}

    explicit RngStream(std::uint64_t seed) : engine_(mix64(seed, 0)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Exponential holding time with the given rate; +inf when rate == 0.
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

    /// Fair coin.
    bool coin() { return (engine_() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
};

} // namespace swstab
