#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "rtp/coeffs.hpp"
#include "rtp/trigpoly.hpp"

using rtp::CoefficientModel;
using rtp::RngStream;
using rtp::TrigPolynomial;
using rtp::two_pi;

namespace {

// Extended-precision direct summation, no angle reduction.
long double eval_oracle(const TrigPolynomial& p, long double t) {
    long double acc = 0.0L;
    for (int k = 1; k <= p.n(); ++k)
        acc += static_cast<long double>(p.a()[k - 1]) * std::cos(k * t) +
               static_cast<long double>(p.b()[k - 1]) * std::sin(k * t);
    return acc / std::sqrt(static_cast<long double>(p.n()));
}

TrigPolynomial random_poly(const CoefficientModel& model, int n, std::uint64_t seed) {
    auto stream = RngStream::derive(seed, 0);
    return rtp::sample_polynomial(model, n, stream);
}

} // namespace

TEST_CASE("single-mode evaluations") {
    const TrigPolynomial cosine({1.0}, {0.0});
    REQUIRE(rtp::eval(cosine, 0.0) == Catch::Approx(1.0).margin(1e-15));
    const TrigPolynomial sine({0.0}, {1.0});
    REQUIRE(rtp::eval(sine, std::numbers::pi / 2) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("eval matches the extended-precision oracle") {
    const auto p = random_poly(CoefficientModel::gaussian(), 200, 31);
    for (double t : {0.7, 3.1, 6.2, -2.5, 17.3})
        REQUIRE(rtp::eval(p, t) ==
                Catch::Approx(static_cast<double>(eval_oracle(p, t))).margin(1e-10));
}

TEST_CASE("fast paired evaluation agrees with eval and eval_derivative") {
    const auto p = random_poly(CoefficientModel::gaussian(), 1024, 37);
    for (double t : {0.1, 1.9, 4.4, 6.28}) {
        const auto [f, df] = rtp::detail::eval_pair(p, t);
        REQUIRE(f == Catch::Approx(rtp::eval(p, t)).margin(1e-10));
        REQUIRE(df == Catch::Approx(rtp::eval_derivative(p, t)).margin(1e-7 * p.n()));
    }
}

TEST_CASE("grid of a single cosine mode") {
    const TrigPolynomial p({1.0}, {0.0});
    const auto g = rtp::eval_grid(p, 8);
    for (int j = 0; j < 8; ++j)
        REQUIRE(g.values[j] == Catch::Approx(std::cos(two_pi * j / 8)).margin(1e-14));
}

TEST_CASE("FFT grid agrees with direct summation") {
    const auto p = random_poly(CoefficientModel::gaussian(), 64, 5);
    const auto g = rtp::eval_grid(p, 256);
    double maxval = g.max_abs();
    for (int j = 0; j < 256; ++j)
        REQUIRE(std::abs(g.values[j] - rtp::eval(p, g.point(j))) <= 1e-9 * (1.0 + maxval));
}

TEST_CASE("grid derivative matches centered finite differences on a finer grid") {
    const auto p = random_poly(CoefficientModel::gaussian(), 64, 6);
    const int M = 256;
    // FD truncation error is h^2/6 * f''' with f''' ~ n^3; the 512x finer
    // grid keeps the oracle's own error below the 1e-4 comparison margin.
    const int refine = 512;
    const auto g = rtp::eval_grid(p, M, /*with_derivative=*/true);
    const auto fine = rtp::eval_grid(p, refine * M);
    for (int j = 0; j < M; ++j) {
        const double h = two_pi / (refine * M);
        const int jj = refine * j;
        const double fd = (fine.values[(jj + 1) % (refine * M)] -
                           fine.values[(jj + refine * M - 1) % (refine * M)]) /
                          (2.0 * h);
        REQUIRE(g.derivative_values[j] == Catch::Approx(fd).margin(1e-4));
    }
}

TEST_CASE("direct path accepts non-power-of-two grids") {
    const auto p = random_poly(CoefficientModel::rademacher(), 16, 7);
    const auto g = rtp::eval_grid(p, 100);
    REQUIRE(g.values.size() == 100);
    REQUIRE(g.values[17] == Catch::Approx(rtp::eval(p, g.point(17))).margin(1e-12));
}

TEST_CASE("grid smaller than 2n+2 is rejected") {
    const auto p = random_poly(CoefficientModel::gaussian(), 64, 8);
    REQUIRE_THROWS_AS(rtp::eval_grid(p, 128), std::invalid_argument);
}

TEST_CASE("grid mean vanishes (no constant term)") {
    const auto p = random_poly(CoefficientModel::gaussian(), 128, 9);
    const auto g = rtp::eval_grid(p, 512);
    double mean = 0.0;
    for (double v : g.values) mean += v;
    mean /= g.M;
    REQUIRE(std::abs(mean) <= 1e-10 * g.max_abs());
}

TEST_CASE("Parseval identity on the grid") {
    const auto p = random_poly(CoefficientModel::uniform(), 96, 10);
    const auto g = rtp::eval_grid(p, 256);
    double grid_power = 0.0;
    for (double v : g.values) grid_power += v * v;
    grid_power /= g.M;
    double coeff_power = 0.0;
    for (int k = 1; k <= p.n(); ++k)
        coeff_power += p.a()[k - 1] * p.a()[k - 1] + p.b()[k - 1] * p.b()[k - 1];
    coeff_power /= 2.0 * p.n();
    REQUIRE(grid_power == Catch::Approx(coeff_power).epsilon(1e-10));
}

TEST_CASE("leave-one-out evaluation") {
    const TrigPolynomial single({1.0}, {0.5});
    for (double t : {0.0, 1.3, 4.0})
        REQUIRE(rtp::leave_one_out_eval(single, 1, t) == Catch::Approx(0.0).margin(1e-15));

    const TrigPolynomial two({1.0, 0.0}, {0.0, 0.0});
    REQUIRE(rtp::leave_one_out_eval(two, 2, 0.9) ==
            Catch::Approx(std::cos(0.9) / std::sqrt(2.0)).margin(1e-14));

    const auto p = random_poly(CoefficientModel::gaussian(), 32, 11);
    std::vector<double> za(p.a().begin(), p.a().end()), zb(p.b().begin(), p.b().end());
    za[2] = 0.0;
    zb[2] = 0.0;
    const TrigPolynomial zeroed(za, zb);
    for (double t : {0.2, 2.2, 5.9})
        REQUIRE(rtp::leave_one_out_eval(p, 3, t) ==
                Catch::Approx(rtp::eval(zeroed, t)).margin(1e-12));

    REQUIRE_THROWS_AS(rtp::leave_one_out_eval(p, 0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(rtp::leave_one_out_eval(p, 33, 0.0), std::invalid_argument);
}

TEST_CASE("local process values compose with eval") {
    const TrigPolynomial cosine({1.0}, {0.0});
    const std::vector<double> at_pi = {std::numbers::pi};
    REQUIRE(rtp::local_eval(cosine, 0.0, at_pi)[0] == Catch::Approx(-1.0).margin(1e-14));

    const auto p = random_poly(CoefficientModel::gaussian(), 48, 12);
    const std::vector<double> tgrid = {0.0, 0.5, 1.0, 3.0, 6.0};
    const auto g = rtp::local_eval(p, 1.234, tgrid);
    REQUIRE(g[0] == Catch::Approx(rtp::eval(p, 1.234)).margin(1e-12));
    for (std::size_t i = 0; i < tgrid.size(); ++i)
        REQUIRE(g[i] == Catch::Approx(rtp::eval(p, 1.234 + tgrid[i] / p.n())).margin(1e-12));

    const auto dg = rtp::local_eval_derivative(p, 1.234, tgrid);
    REQUIRE(dg[1] ==
            Catch::Approx(rtp::eval_derivative(p, 1.234 + 0.5 / p.n()) / p.n()).margin(1e-12));
}

TEST_CASE("exact local covariance") {
    const auto rad = random_poly(CoefficientModel::rademacher(), 64, 13);
    REQUIRE(rtp::local_covariance_exact(rad, 0.0) == Catch::Approx(1.0).epsilon(1e-14));
    // sum_k cos(k pi / n) = -1, so the covariance at tau = pi is -1/n
    REQUIRE(rtp::local_covariance_exact(rad, std::numbers::pi) ==
            Catch::Approx(-1.0 / 64.0).margin(1e-12));

    const auto p = random_poly(CoefficientModel::gaussian(), 4096, 14);
    REQUIRE(std::abs(rtp::local_covariance_exact(p, 1.0) - std::sin(1.0) / 1.0) <= 0.08);
}

TEST_CASE("local covariance equals grid quadrature of g_n(t) g_n(s)") {
    const auto p = random_poly(CoefficientModel::gaussian(), 64, 15);
    const int M = 4 * 64 * 4;
    const double t = 0.4, s = 1.7; // tau = -1.3
    double acc = 0.0;
    for (int j = 0; j < M; ++j) {
        const double X = two_pi * j / M;
        acc += rtp::eval(p, X + t / p.n()) * rtp::eval(p, X + s / p.n());
    }
    acc /= M;
    REQUIRE(acc == Catch::Approx(rtp::local_covariance_exact(p, s - t)).margin(1e-8));
}

TEST_CASE("CSV round trip") {
    const auto p = random_poly(CoefficientModel::gaussian(), 40, 16);
    std::stringstream ss;
    rtp::save_csv(p, "gaussian", ss);
    std::string model;
    const auto q = rtp::load_csv(ss, &model);
    REQUIRE(model == "gaussian");
    REQUIRE(q.n() == p.n());
    for (int k = 0; k < p.n(); ++k) {
        REQUIRE(q.a()[k] == p.a()[k]);
        REQUIRE(q.b()[k] == p.b()[k]);
    }
}

TEST_CASE("constructor validates coefficients") {
    REQUIRE_THROWS_AS(TrigPolynomial({}, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(TrigPolynomial({1.0, 2.0}, {0.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(TrigPolynomial({std::nan("")}, {0.0}), std::invalid_argument);
}
