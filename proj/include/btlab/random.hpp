#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace btlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seeded random stream with deterministic splitting. Children are derived
// from the root seed, not from the parent's draw position, so consumers of
// one sub-stream never perturb another. Labels must be distinct per parent.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : root_(seed), engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution, platform independent.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    RandomStream split(std::uint64_t label) const {
        return RandomStream(splitmix64(root_ ^ splitmix64(label + 0x632be59bd9b4e019ULL)));
    }

    // Index drawn proportionally to nonnegative weights (not necessarily normalized).
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        return categorical(weights, total);
    }

    std::size_t categorical(std::span<const double> weights, double total) {
        const double x = uniform01() * total;
        double acc = 0.0;
        std::size_t last_positive = 0;
        bool seen = false;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            acc += weights[i];
            last_positive = i;
            seen = true;
            if (x < acc) return i;
        }
        (void)seen;
        return last_positive;
    }

private:
    std::uint64_t root_;
    std::mt19937_64 engine_;
};

}  // namespace btlab
