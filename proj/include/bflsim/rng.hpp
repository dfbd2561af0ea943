#pragma once

#include <cstdint>
#include <cmath>
#include <cstring>
#include <string_view>
#include <vector>

namespace bflsim {

// Deterministic stream RNG: a xoshiro256** generator whose state is expanded
// by SplitMix64 from a key mixed out of (global seed, entity id, round,
// purpose tag).  Every stochastic call site in the simulator derives its own
// stream this way, so runs replay bit-exactly regardless of evaluation order.
// All variate conversions (uniform, normal, integer) are implemented here and
// never delegated to std:: distributions, whose output is
// implementation-defined.
class Rng {
public:
    static constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
    static constexpr std::uint64_t kFnvPrime = 1099511628211ull;

    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static std::uint64_t hash_tag(std::string_view tag) {
        std::uint64_t h = kFnvOffset;
        for (unsigned char c : tag) {
            h ^= c;
            h *= kFnvPrime;
        }
        return h;
    }

    Rng() : Rng(0x853c49e6748fea9bull) {}

    explicit Rng(std::uint64_t key) {
        std::uint64_t sm = key;
        for (auto& s : state_) s = splitmix64(sm);
    }

    // Stream for (seed, entity, round, tag [, extra]).
    static Rng stream(std::uint64_t seed, std::uint64_t entity, std::uint64_t round,
                      std::string_view tag, std::uint64_t extra = 0) {
        std::uint64_t key = seed;
        key = mix(key, entity);
        key = mix(key, round);
        key = mix(key, hash_tag(tag));
        key = mix(key, extra);
        return Rng(key);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [lo, hi] by rejection; exact for any span.
    std::uint64_t uniform_u64(std::uint64_t lo, std::uint64_t hi) {
        const std::uint64_t span = hi - lo + 1;
        if (span == 0) return next_u64();  // full range
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return lo + r % span;
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_u64(0, n - 1)); }

    // Box-Muller; both uniforms are always consumed so the stream advance
    // does not depend on caller state.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    double exponential(double rate) {
        double u = uniform01();
        while (u <= 0.0) u = uniform01();
        return -std::log(u) / rate;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // First `count` entries of a Fisher-Yates pass over {0..n-1}.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        if (count > n) count = n;
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t j = i + index(n - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(count);
        return idx;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t mix(std::uint64_t acc, std::uint64_t v) {
        std::uint64_t x = acc ^ (v + 0x9e3779b97f4a7c15ull + (acc << 6) + (acc >> 2));
        return splitmix64(x);
    }

    std::uint64_t state_[4];
};

}  // namespace bflsim
