#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace psc {

// splitmix64. The standard <random> distributions are not reproducible
// across library implementations, so every seeded decision in the
// toolkit draws from this generator with explicit arithmetic.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Unbiased uniform in [0, n); n must be positive.
    uint64_t next_below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    // Picks an index with probability proportional to weights[i].
    // Weights must be non-negative with a positive sum.
    std::size_t next_weighted(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        const double r = next_double() * total;
        double cum = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            cum += weights[i];
            if (r < cum) return i;
        }
        return weights.size() - 1;  // floating-point edge
    }

private:
    uint64_t state_;
};

// Folds an arbitrary tuple of values into one seed. Order-sensitive.
inline uint64_t mix_seed(std::initializer_list<uint64_t> parts) {
    uint64_t acc = 0x243f6a8885a308d3ULL;
    for (uint64_t p : parts) {
        SplitMix64 rng(acc ^ p);
        acc = rng.next();
    }
    return acc;
}

}  // namespace psc
