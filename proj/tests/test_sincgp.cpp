#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "rtp/rng.hpp"
#include "rtp/sincgp.hpp"

using rtp::CholeskySimulator;
using rtp::RngStream;
using rtp::SpectralSimulator;
using rtp::two_pi;

TEST_CASE("sinc covariance values") {
    REQUIRE(rtp::sinc_cov(0.0) == 1.0);
    REQUIRE(rtp::sinc_cov(std::numbers::pi) == Catch::Approx(0.0).margin(1e-15));
    // even and bounded by one
    auto s = RngStream::derive(1, 0);
    for (int i = 0; i < 1000; ++i) {
        const double tau = s.uniform(-10.0, 10.0);
        REQUIRE(rtp::sinc_cov(tau) == rtp::sinc_cov(-tau));
        REQUIRE(std::abs(rtp::sinc_cov(tau)) <= 1.0);
    }
}

TEST_CASE("sinc second derivative at zero is -1/3") {
    const double h = 1e-3;
    const double second =
        (rtp::sinc_cov(h) - 2.0 * rtp::sinc_cov(0.0) + rtp::sinc_cov(-h)) / (h * h);
    REQUIRE(second == Catch::Approx(-1.0 / 3.0).margin(1e-6));
}

TEST_CASE("taylor and direct branches join continuously") {
    const double at = 1e-4;
    const double below = rtp::sinc_cov(std::nextafter(at, 0.0));
    const double above = rtp::sinc_cov(std::nextafter(at, 1.0));
    REQUIRE(below == Catch::Approx(above).margin(1e-12));
}

TEST_CASE("expected zero counts") {
    REQUIRE(rtp::expected_zeros(0.0, two_pi) == Catch::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-14));
    REQUIRE(rtp::expected_zeros(0.0, two_pi) == Catch::Approx(1.1547005383792515).margin(1e-12));
    REQUIRE(rtp::expected_zeros(0.0, 0.0) == 0.0);
    REQUIRE(rtp::expected_zeros(0.0, std::numbers::pi) ==
            Catch::Approx(0.5773502691896258).margin(1e-12));
}

TEST_CASE("cholesky sampler on trivial grids") {
    // single point: r(0) = 1 means a standard normal draw
    auto s1 = RngStream::derive(5, 0);
    auto s2 = RngStream::derive(5, 0);
    const auto sample = rtp::simulate_cholesky({0.0}, s1);
    const double z = s2.normal();
    REQUIRE(sample.values.size() == 1);
    REQUIRE(sample.values[0] == Catch::Approx(z).margin(1e-4)); // jitter shifts it slightly
    REQUIRE(sample.method == "cholesky");

    // {0, pi}: sinc(pi) = 0, the two coordinates are independent normals
    const int trials = 4000;
    double cross = 0.0;
    for (int t = 0; t < trials; ++t) {
        auto st = RngStream::derive(6, t);
        const auto v = rtp::simulate_cholesky({0.0, std::numbers::pi}, st);
        cross += v.values[0] * v.values[1];
    }
    REQUIRE(std::abs(cross / trials) <= 5.0 / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("cholesky empirical covariance converges to the kernel") {
    const auto grid = rtp::uniform_grid(0.0, two_pi, 64);
    const CholeskySimulator sim(grid);
    const int trials = 5000;
    std::vector<double> cov(64 * 64, 0.0);
    for (int t = 0; t < trials; ++t) {
        auto st = RngStream::derive(7, t);
        const auto v = sim.sample(st);
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 64; ++j) cov[i * 64 + j] += v.values[i] * v.values[j];
    }
    double sup = 0.0;
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j)
            sup = std::max(sup,
                           std::abs(cov[i * 64 + j] / trials - rtp::sinc_cov(grid[i] - grid[j])));
    REQUIRE(sup <= 0.05);
}

TEST_CASE("spectral surrogate covariance") {
    // single node at lambda = 1/2: covariance is exactly cos(tau/2)
    for (double tau : {0.0, 0.7, 2.0, 5.0})
        REQUIRE(rtp::spectral_surrogate_cov(1, tau) == Catch::Approx(std::cos(tau / 2)).epsilon(1e-14));

    // midpoint-rule error at Q = 256 stays below 1e-4 on [0, 2*pi]
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double tau = two_pi * i / 1000.0;
        worst = std::max(worst, std::abs(rtp::spectral_surrogate_cov(256, tau) - rtp::sinc_cov(tau)));
    }
    REQUIRE(worst <= 1e-4);
}

TEST_CASE("cholesky and spectral empirical covariances agree") {
    const auto grid = rtp::uniform_grid(0.0, two_pi, 64);
    const CholeskySimulator chol(grid);
    const SpectralSimulator spec(grid, 256);
    const int trials = 5000;
    std::vector<double> cov_c(64, 0.0), cov_s(64, 0.0); // first row is enough by stationarity
    for (int t = 0; t < trials; ++t) {
        auto sc = RngStream::derive(8, t);
        auto ss = RngStream::derive(9, t);
        const auto vc = chol.sample(sc);
        const auto vs = spec.sample(ss);
        for (int j = 0; j < 64; ++j) {
            cov_c[j] += vc.values[0] * vc.values[j];
            cov_s[j] += vs.values[0] * vs.values[j];
        }
    }
    double sup = 0.0;
    for (int j = 0; j < 64; ++j) sup = std::max(sup, std::abs(cov_c[j] - cov_s[j]) / trials);
    REQUIRE(sup <= 0.05);
}

TEST_CASE("path zero counting catches sign changes and refines positions") {
    const std::vector<double> grid = {0.0, 1.0, 2.0, 3.0};
    const std::vector<double> vals = {1.0, -1.0, -0.5, 2.0};
    const auto z = rtp::count_path_zeros(grid, vals);
    REQUIRE(z.count == 2);
    REQUIRE(z.positions[0] == Catch::Approx(0.5).margin(0.2));
    REQUIRE(z.positions[1] > 2.0);
}

TEST_CASE("monte carlo zero mean matches the Kac-Rice value") {
    const auto full = rtp::mc_zero_mean(2000, 256, 321, "cholesky");
    REQUIRE(std::abs(full.mean - full.expected) <= 3.0 * full.stderr_mean);
    REQUIRE(full.expected == Catch::Approx(1.1547005383792515).margin(1e-12));

    const auto half = rtp::mc_zero_mean(2000, 128, 321, "cholesky", 0.0, std::numbers::pi);
    REQUIRE(std::abs(half.mean - half.expected) <= 3.0 * half.stderr_mean);
    REQUIRE(half.expected == Catch::Approx(0.5773502691896258).margin(1e-12));
}

TEST_CASE("zero mean is insensitive to halving the grid spacing") {
    const auto coarse = rtp::mc_zero_mean(2000, 256, 33, "spectral");
    const auto fine = rtp::mc_zero_mean(2000, 512, 33, "spectral");
    REQUIRE(std::abs(coarse.mean - fine.mean) <= std::max(coarse.stderr_mean, fine.stderr_mean));
}

TEST_CASE("jittered factorizations succeed on fine grids") {
    // 512 points over [0, 2*pi]: strongly rank-deficient sinc matrix
    REQUIRE_NOTHROW(CholeskySimulator(rtp::uniform_grid(0.0, two_pi, 512)));
}

TEST_CASE("process samples export as (t, value) CSV") {
    auto s = RngStream::derive(77, 0);
    const auto sample = rtp::simulate_spectral(rtp::uniform_grid(0.0, 1.0, 5), 64, s);
    std::ostringstream os;
    rtp::save_csv(sample, os);
    const std::string text = os.str();
    REQUIRE(text.rfind("t,value\n", 0) == 0);
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 6);
}

TEST_CASE("grid preconditions are enforced") {
    REQUIRE_THROWS_AS(CholeskySimulator(rtp::uniform_grid(0.0, 1.0, 2049)),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(CholeskySimulator({0.0, 1e-4}), std::invalid_argument);
    auto s = RngStream::derive(1, 1);
    REQUIRE_THROWS_AS(rtp::simulate_spectral(rtp::uniform_grid(0.0, 1.0, 8), 32, s),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(rtp::mc_zero_mean(600, 64, 1, "cholesky"), std::invalid_argument);
}
