#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rtp {

// Reproducible stream derivation
// ------------------------------
// Every random quantity in this library is drawn from an RngStream obtained
// as RngStream::derive(master_seed, key). The derivation rule is part of the
// file-format/reproducibility contract and must not change between versions:
//
//   x0       = master_seed + (key + 1) * 0x9E3779B97F4A7C15  (mod 2^64)
//   state[i] = splitmix64(x),  i = 0..3   (four successive outputs)
//
// and the stream itself is xoshiro256++ over that state. Distinct keys give
// statistically independent streams; a single stream is single-consumer.
//
// Experiments compose keys as (salt << 32) | index, where `salt` is a fixed
// per-purpose constant, so that no two purposes ever share a stream.
class RngStream {
public:
    static constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

    static constexpr std::uint64_t splitmix64(std::uint64_t& x) {
        x += golden;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static RngStream derive(std::uint64_t master_seed, std::uint64_t key) {
        RngStream s;
        s.master_ = master_seed;
        s.key_ = key;
        std::uint64_t x = master_seed + (key + 1) * golden;
        for (auto& w : s.state_) w = splitmix64(x);
        return s;
    }

    static constexpr std::uint64_t compose_key(std::uint32_t salt, std::uint32_t index) {
        return (static_cast<std::uint64_t>(salt) << 32) | index;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0,1), 53 significant bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0,1]; safe as a log() argument.
    double uniform01_open_below() { return 1.0 - uniform01(); }

    /// Standard normal via Box-Muller. Consumes exactly two uniforms per
    /// call so the draw count stays a fixed function of the call count.
    double normal() {
        const double u1 = uniform01_open_below();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// +1 or -1 with equal probability.
    double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t master_seed() const { return master_; }
    std::uint64_t key() const { return key_; }

private:
    RngStream() = default;

    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    std::uint64_t master_ = 0;
    std::uint64_t key_ = 0;
};

} // namespace rtp
