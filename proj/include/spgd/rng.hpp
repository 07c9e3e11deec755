#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "spgd/vec.hpp"

namespace spgd {

// Counter-based deterministic random stream.
//
// Every draw is a pure function of (seed, stream, lane): stream is the
// iteration index n, lane indexes draws within a step. This realizes the
// noise filtration as the stream history -- eta_{n+1} depends only on the
// stream at index n+1, so replaying a seed reproduces a run bit-exactly and
// the martingale-difference property holds by construction.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t bits(std::uint64_t stream, std::uint64_t lane) const {
        return mix(seed_ ^ mix(stream ^ mix(lane ^ 0x9e3779b97f4a7c15ull)));
    }

    // uniform in [0, 1) with 53 bits
    double uniform01(std::uint64_t stream, std::uint64_t lane) const {
        return static_cast<double>(bits(stream, lane) >> 11) * 0x1.0p-53;
    }

    double uniform(std::uint64_t stream, std::uint64_t lane, double a, double b) const {
        return a + (b - a) * uniform01(stream, lane);
    }

    // standard normal via Box-Muller; one value per (stream, lane), two
    // underlying uniform draws on lanes (2*lane, 2*lane+1)
    double gaussian(std::uint64_t stream, std::uint64_t lane) const {
        double u1 = uniform01(stream, 2 * lane);
        double u2 = uniform01(stream, 2 * lane + 1);
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace spgd
