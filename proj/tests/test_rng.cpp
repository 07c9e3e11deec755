#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spgd/rng.hpp"

using spgd::CounterRng;

TEST_CASE("counter rng is a pure function of (seed, stream, lane)") {
    CounterRng a(42), b(42), c(43);
    REQUIRE(a.bits(7, 3) == b.bits(7, 3));
    REQUIRE(a.uniform01(123456789, 0) == b.uniform01(123456789, 0));
    REQUIRE(a.gaussian(5, 1) == b.gaussian(5, 1));
    REQUIRE(a.bits(7, 3) != c.bits(7, 3));
    REQUIRE(a.bits(7, 3) != a.bits(7, 4));
    REQUIRE(a.bits(7, 3) != a.bits(8, 3));
}

TEST_CASE("uniform01 lies in [0, 1)") {
    CounterRng rng(1);
    double lo = 1.0, hi = 0.0;
    for (std::uint64_t n = 0; n < 100000; ++n) {
        double u = rng.uniform01(n, 0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
    REQUIRE(lo < 0.01);
    REQUIRE(hi > 0.99);
}

TEST_CASE("gaussian moments") {
    CounterRng rng(7);
    const int N = 200000;
    double s = 0.0, s2 = 0.0;
    for (int n = 0; n < N; ++n) {
        double z = rng.gaussian(n, 0);
        s += z;
        s2 += z * z;
    }
    double mean = s / N;
    double var = s2 / N - mean * mean;
    REQUIRE(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(N)));
    REQUIRE(var == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("uniform range transform") {
    CounterRng rng(9);
    for (std::uint64_t n = 0; n < 1000; ++n) {
        double u = rng.uniform(n, 2, -3.0, 5.0);
        REQUIRE(u >= -3.0);
        REQUIRE(u < 5.0);
    }
}
