#pragma once

#include <cstdint>
#include <string_view>

#include "common.hpp"

namespace aftrl {

// Deterministic pseudo-random stream. Distributions are implemented by hand
// (rather than <random> distribution objects) so that the exact draw sequence
// is fixed by this code, not by the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // xorshift64* generator
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dULL;
    }

    // Uniform in [0, 1)
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

    bool bernoulli(double p) { return next_double() < p; }

    // Standard normal via Box-Muller (one value per call; no caching so the
    // consumption order stays one-draw-per-uniform-pair).
    double normal(double mean = 0.0, double std_dev = 1.0) {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
        return mean + std_dev * z;
    }

    Vec uniform_vec(std::size_t n, double lo, double hi) {
        Vec v(n);
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }

private:
    std::uint64_t state_;
};

// splitmix64 mixing, used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : name) {
        h ^= std::uint64_t(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    return h;
}

// All randomness in a run flows from one master seed through named substreams
// (env, agent init, exploration, perturbation, de, ...), so components can be
// reseeded independently.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name,
                                    std::uint64_t index = 0) {
    return mix64(master ^ mix64(hash_name(name)) ^ mix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

inline Rng substream(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
    return Rng(substream_seed(master, name, index));
}

}  // namespace aftrl
