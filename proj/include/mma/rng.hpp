#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mma {

// Deterministic random stream. The engine is std::mt19937_64 (a standardized
// sequence); the value conversions are done by hand so that every draw is
// bit-reproducible for a given seed regardless of the standard library.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    // Standard normal via Box-Muller; one trig draw per call, no cached state.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    double normal(double mean, double std) { return mean + std * normal(); }

    // Derives an independent stream for a named sub-task of a master seed.
    static RngStream derive(std::uint64_t seed, std::uint64_t stream_id) {
        // splitmix64 finalizer over the (seed, stream) pair
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream_id + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return RngStream(z ^ (z >> 31));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace mma
