#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace sagda {

/// Deterministic seeded generator. The engine is xoshiro256++ (Blackman &
/// Vigna), state-initialized from the 64-bit seed via splitmix64. Both are
/// pure integer arithmetic, so a given seed replays the same sequence on any
/// platform. This choice is frozen: changing it would silently invalidate
/// every golden value downstream.
///
/// Streams are split by string label, not by drawing: `split("x")` derives a
/// child seed from (this stream's seed, label) without consuming draws, so
/// the order in which modules claim their children does not matter. Children
/// with distinct labels get distinct seeds and, in practice, unrelated
/// sequences.
class rng {
public:
    explicit rng(uint64_t seed) : seed_(seed) {
        uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    uint64_t seed() const { return seed_; }

    rng split(std::string_view label) const {
        uint64_t h = fnv1a64_seed(seed_);
        for (char c : label) h = fnv1a64_step(h, static_cast<unsigned char>(c));
        // splitmix64 finalizer decorrelates near-identical hashes
        return rng(splitmix64_once(h));
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be >= 1. Rejection-free modulo bias
    /// is irrelevant at n << 2^64 scales used here, but stay exact anyway.
    uint64_t uniform_index(uint64_t n) {
        // Lemire-style bounded draw with rejection for exact uniformity.
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Standard normal via Box-Muller (fresh pair each call, second value
    /// discarded so the draw count per call is fixed).
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238 * u2);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

private:
    static constexpr uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static uint64_t splitmix64(uint64_t& s) {
        s += 0x9e3779b97f4a7c15ULL;
        return splitmix64_once(s);
    }

    static uint64_t splitmix64_once(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static constexpr uint64_t fnv1a64_seed(uint64_t key) {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (int i = 0; i < 8; ++i) h = fnv1a64_step(h, (key >> (8 * i)) & 0xff);
        return h;
    }

    static constexpr uint64_t fnv1a64_step(uint64_t h, uint64_t byte) {
        return (h ^ byte) * 0x100000001b3ULL;
    }

    uint64_t seed_;
    std::array<uint64_t, 4> state_;
};

}  // namespace sagda
