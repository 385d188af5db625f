#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qdtl {

// Deterministic RNG with named substreams. Every experiment derives all of its
// randomness from one 64-bit master seed; substreams are keyed by (name, index)
// so each noise source (problem, oracle-noise, estimation-noise, algorithm) can
// be frozen independently of how many draws the others make.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

    std::uint64_t seed() const { return seed_; }

    // Substreams derive from the original seed, not the engine state, so they
    // are stable no matter how many values have been drawn from the parent.
    Rng substream(std::string_view name, std::uint64_t index = 0) const {
        std::uint64_t h = fnv1a(name);
        std::uint64_t s = seed_ ^ h;
        s = mix(s + 0x9e3779b97f4a7c15ull * (index + 1));
        return Rng(s);
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits; bit-reproducible across platforms.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    int sign() { return (next_u64() & 1) ? 1 : -1; }

    // Unbiased integer in [0, bound) by rejection.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    // Exposed for std distributions (e.g. binomial sampling of multinomial
    // counts); the sequence is deterministic for a fixed build.
    std::mt19937_64& engine() { return engine_; }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        return h;
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace qdtl
