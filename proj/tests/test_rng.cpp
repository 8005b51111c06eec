#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rtp/rng.hpp"

using rtp::RngStream;

TEST_CASE("streams are deterministic in (master, key)") {
    auto s1 = RngStream::derive(42, 7);
    auto s2 = RngStream::derive(42, 7);
    for (int i = 0; i < 100; ++i) REQUIRE(s1.next_u64() == s2.next_u64());
}

TEST_CASE("distinct keys give distinct streams") {
    auto s1 = RngStream::derive(42, 7);
    auto s2 = RngStream::derive(42, 8);
    auto s3 = RngStream::derive(43, 7);
    int same12 = 0, same13 = 0;
    for (int i = 0; i < 64; ++i) {
        const auto a = s1.next_u64();
        if (a == s2.next_u64()) ++same12;
        if (a == s3.next_u64()) ++same13;
    }
    REQUIRE(same12 == 0);
    REQUIRE(same13 == 0);
}

TEST_CASE("uniform01 lands in [0,1) and has the right mean") {
    auto s = RngStream::derive(1, 0);
    double sum = 0.0;
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
        const double u = s.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    REQUIRE(std::abs(sum / m - 0.5) < 5.0 / std::sqrt(12.0 * m));
}

TEST_CASE("normal draws match N(0,1) moments") {
    auto s = RngStream::derive(2, 0);
    const int m = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < m; ++i) {
        const double z = s.normal();
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / m;
    const double var = sumsq / m - mean * mean;
    REQUIRE(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(m)));
    REQUIRE(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / m));
}

TEST_CASE("cross-stream correlation is negligible") {
    auto s1 = RngStream::derive(9, 0);
    auto s2 = RngStream::derive(9, 1);
    const int m = 100000;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += (s1.uniform01() - 0.5) * (s2.uniform01() - 0.5);
    // correlation estimate has sd ~ 1/(12 sqrt(m)) for independent streams
    REQUIRE(std::abs(acc / m) < 5.0 / (12.0 * std::sqrt(static_cast<double>(m))));
}

TEST_CASE("compose_key separates salt and index") {
    REQUIRE(RngStream::compose_key(1, 0) != RngStream::compose_key(0, 1));
    REQUIRE(RngStream::compose_key(2, 3) == ((std::uint64_t{2} << 32) | 3));
}
