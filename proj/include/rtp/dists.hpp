#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rtp/coeffs.hpp"
#include "rtp/errors.hpp"
#include "rtp/gaussian.hpp"
#include "rtp/trigpoly.hpp"

namespace rtp {

/// Distances of the law of f_n(X) under P_X (realized by the uniform grid)
/// to the standard Gaussian. One CSV row per (model, n, seed).
struct DistanceReport {
    int n = 0;
    double kolmogorov = 0.0;
    double cf_deviation = 0.0; // sup over the xi grid of |cf - exp(-xi^2/2)|
    double tv = 0.0;
    double c3_proxy = 0.0;
    int grid_M = 0;
};

/// (1/M) sum_j exp(i xi f_n(t_j)), the empirical characteristic function of
/// f_n(X) for uniform X. Periodic trapezoid quadrature, spectrally accurate.
inline std::complex<double> empirical_cf(std::span<const double> values, double xi) {
    double re = 0.0, im = 0.0, re_c = 0.0, im_c = 0.0;
    for (double v : values) {
        const double ang = xi * v;
        const double c = std::cos(ang), s = std::sin(ang);
        double t = re + c;
        re_c += (std::abs(re) >= std::abs(c)) ? (re - t) + c : (c - t) + re;
        re = t;
        t = im + s;
        im_c += (std::abs(im) >= std::abs(s)) ? (im - t) + s : (s - t) + im;
        im = t;
    }
    const double m = static_cast<double>(values.size());
    return {(re + re_c) / m, (im + im_c) / m};
}

inline std::complex<double> empirical_cf(const TrigPolynomial& p, double xi, int M) {
    require(M >= 4 * p.n(), "empirical_cf: M must be >= 4n");
    return empirical_cf(eval_grid(p, M).values, xi);
}

/// sup_x |empirical CDF - Phi(x)|, evaluated at both sides of every jump.
inline double kolmogorov_to_gaussian(std::span<const double> values) {
    require(!values.empty(), "kolmogorov_to_gaussian: empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double phi = normal_cdf(sorted[i]);
        sup = std::max(sup, std::abs(phi - static_cast<double>(i) / m));
        sup = std::max(sup, std::abs(phi - static_cast<double>(i + 1) / m));
    }
    return sup;
}

/// Half L1 distance between a Gaussian-kernel density estimate of the sample
/// and the standard normal density. The integral runs over [-8, 8] (Gaussian
/// mass outside is < 1e-14) by trapezoid with step <= bandwidth/4; KDE mass
/// the estimate itself puts outside the window is added by direct summation.
inline double tv_to_gaussian(std::span<const double> values, double bandwidth = 0.0) {
    require(values.size() >= 1024, "tv_to_gaussian: need at least 2^10 values");
    const double m = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / m;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= m;
    if (var <= 0.0) throw numeric_error("tv_to_gaussian: degenerate (zero-variance) sample");

    const double h = bandwidth > 0.0 ? bandwidth : 1.06 * std::sqrt(var) * std::pow(m, -0.2);
    constexpr double window = 8.0;
    const int steps = static_cast<int>(std::ceil(2.0 * window / (h / 4.0)));
    const double dx = 2.0 * window / steps;

    double integral = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double x = -window + i * dx;
        double kde = 0.0;
        for (double v : values) kde += normal_pdf((x - v) / h);
        kde /= m * h;
        const double term = std::abs(kde - normal_pdf(x));
        integral += (i == 0 || i == steps) ? 0.5 * term : term;
    }
    double tv = 0.5 * integral * dx;

    // KDE mass escaping the window, one erfc pair per sample point.
    double outside = 0.0;
    for (double v : values)
        outside += normal_cdf((-window - v) / h) + 1.0 - normal_cdf((window - v) / h);
    tv += 0.5 * outside / m;
    return std::min(tv, 1.0);
}

/// Finite family of trig test functions phi(x) = cos(lambda x)/max(1,lambda^3)
/// or sin(.)/max(1,lambda^3); all derivatives up to order three are bounded
/// by one, so the family supremum is a certified lower bound of the C^3
/// distance.
struct TestFunctionFamily {
    enum class Kind { cos, sin };
    struct Member {
        Kind kind;
        double lambda;
    };
    std::vector<Member> members;

    static TestFunctionFamily standard() {
        TestFunctionFamily fam;
        for (double lam : {0.5, 1.0, 1.5, 2.0, 3.0}) {
            fam.members.push_back({Kind::cos, lam});
            fam.members.push_back({Kind::sin, lam});
        }
        return fam;
    }
};

/// sup over the family of |grid mean of phi(f_n) - E[phi(G)]| with the exact
/// Gaussian values E[cos(lambda G)] = exp(-lambda^2/2), E[sin(lambda G)] = 0.
inline double c3_proxy_distance(std::span<const double> values, const TestFunctionFamily& fam) {
    require(!fam.members.empty(), "c3_proxy_distance: empty test family");
    require(!values.empty(), "c3_proxy_distance: empty values");
    const double m = static_cast<double>(values.size());
    double sup = 0.0;
    for (const auto& member : fam.members) {
        const double norm = std::max(1.0, member.lambda * member.lambda * member.lambda);
        double acc = 0.0, comp = 0.0;
        for (double v : values) {
            const double ang = member.lambda * v;
            const double t = (member.kind == TestFunctionFamily::Kind::cos) ? std::cos(ang)
                                                                            : std::sin(ang);
            const double s = acc + t;
            comp += (std::abs(acc) >= std::abs(t)) ? (acc - s) + t : (t - s) + acc;
            acc = s;
        }
        const double grid_mean = (acc + comp) / m;
        const double gauss = (member.kind == TestFunctionFamily::Kind::cos)
                                 ? std::exp(-0.5 * member.lambda * member.lambda)
                                 : 0.0;
        sup = std::max(sup, std::abs(grid_mean - gauss) / norm);
    }
    return sup;
}

inline double c3_proxy_distance(const TrigPolynomial& p, const TestFunctionFamily& fam, int M) {
    require(M >= 4 * p.n(), "c3_proxy_distance: M must be >= 4n");
    if (p.is_zero()) throw numeric_error("c3_proxy_distance: degenerate all-zero polynomial");
    return c3_proxy_distance(eval_grid(p, M).values, fam);
}

struct SteinBoundCheck {
    double mean_proxy = 0.0;
    double stderr_proxy = 0.0;
    double bound = 0.0; // C(a1) / sqrt(n)
    bool pass = false;
};

/// Monte Carlo check of E[d_C3(f_n(X), G)] <= C(a1)/sqrt(n). The proxy is a
/// lower bound of d_C3, so the inequality must hold up to sampling error.
inline SteinBoundCheck stein_bound_check(const CoefficientModel& model, int n, int trials,
                                         std::uint64_t master_seed) {
    require(trials >= 30, "stein_bound_check: need at least 30 trials");
    constexpr std::uint32_t salt = 101;
    const int M = static_cast<int>(detail::next_power_of_two(static_cast<std::size_t>(4 * n)));
    const TestFunctionFamily fam = TestFunctionFamily::standard();

    std::vector<double> proxies(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
        RngStream stream = RngStream::derive(master_seed, RngStream::compose_key(salt, t));
        const TrigPolynomial p = sample_polynomial(model, n, stream);
        proxies[t] = c3_proxy_distance(p, fam, M);
    }
    SteinBoundCheck out;
    out.mean_proxy = std::accumulate(proxies.begin(), proxies.end(), 0.0) / trials;
    double var = 0.0;
    for (double v : proxies) var += (v - out.mean_proxy) * (v - out.mean_proxy);
    out.stderr_proxy = std::sqrt(var / (trials - 1)) / std::sqrt(static_cast<double>(trials));
    out.bound = stein_constant(model.moments) / std::sqrt(static_cast<double>(n));
    out.pass = out.mean_proxy <= out.bound;
    return out;
}

/// Quadrature of E_{X,Y}[eps_n(X,Y)^2] with eps_n(X,Y) = (1/n) sum cos(k(X-Y)).
/// eps_n depends on u = X-Y only, so one uniform grid in u suffices; the
/// integrand has modes up to 2n and the rule is exact once MQ > 2n. The exact
/// value is 1/(2n).
inline double epsilon_n_second_moment(int n, int MQ) {
    require(MQ >= 2048, "epsilon_n_second_moment: MQ must be >= 2048");
    require(MQ > 2 * n, "epsilon_n_second_moment: MQ must exceed 2n (aliasing)");
    double acc = 0.0, comp = 0.0;
    for (int j = 0; j < MQ; ++j) {
        const double u = two_pi * j / MQ;
        double eps = 0.0;
        for (int k = 1; k <= n; ++k) eps += std::cos(std::fmod(k * u, two_pi));
        eps /= n;
        const double term = eps * eps;
        const double s = acc + term;
        comp += (std::abs(acc) >= std::abs(term)) ? (acc - s) + term : (term - s) + acc;
        acc = s;
    }
    return (acc + comp) / MQ;
}

struct AntildeEstimate {
    double estimate = 0.0;
    double stderr_estimate = 0.0;
    double bound = 0.0; // (13 + |E a^3|)(|xi|^4 + |xi|^3 + |xi|^2 + 1)/n
};

/// Monte Carlo estimate of
///   E | (1/sqrt(n)) sum_k E_X[ R_k(X) exp(i xi S_n^k(X)/sqrt(n)) ] |^2,
/// inner expectation by grid quadrature, outer by averaging over coefficient
/// draws. S_n^k(X)/sqrt(n) = f_n(X) - R_k(X)/sqrt(n).
inline AntildeEstimate antilde_estimate(const CoefficientModel& model, int n, double xi,
                                        int trials, int M, std::uint64_t master_seed) {
    require(n <= 512, "antilde_estimate: n must be <= 512");
    require(M >= 4 * n, "antilde_estimate: M must be >= 4n");
    require(trials >= 100, "antilde_estimate: need at least 100 trials");
    constexpr std::uint32_t salt = 102;

    // cos(k t_j) = table[(k*j) mod M]; exact index arithmetic.
    std::vector<double> ctab(static_cast<std::size_t>(M)), stab(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) {
        ctab[j] = std::cos(two_pi * j / M);
        stab[j] = std::sin(two_pi * j / M);
    }

    std::vector<double> sq(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
        RngStream stream = RngStream::derive(master_seed, RngStream::compose_key(salt, t));
        const TrigPolynomial p = sample_polynomial(model, n, stream);
        const GridEvaluation g = eval_grid(p, M);
        std::vector<std::complex<double>> ef(static_cast<std::size_t>(M));
        for (int j = 0; j < M; ++j)
            ef[j] = std::polar(1.0, xi * g.values[j]);

        std::complex<double> total(0.0, 0.0);
        const double inv_sqrt_n = p.inv_sqrt_n();
        for (int k = 1; k <= n; ++k) {
            std::complex<double> inner(0.0, 0.0);
            std::size_t idx = 0;
            for (int j = 0; j < M; ++j) {
                const double rk = p.a()[k - 1] * ctab[idx] + p.b()[k - 1] * stab[idx];
                inner += rk * ef[j] * std::polar(1.0, -xi * rk * inv_sqrt_n);
                idx += k;
                if (idx >= static_cast<std::size_t>(M)) idx -= M;
            }
            total += inner / static_cast<double>(M);
        }
        total *= inv_sqrt_n;
        sq[t] = std::norm(total);
    }

    AntildeEstimate out;
    out.estimate = std::accumulate(sq.begin(), sq.end(), 0.0) / trials;
    double var = 0.0;
    for (double v : sq) var += (v - out.estimate) * (v - out.estimate);
    out.stderr_estimate = std::sqrt(var / (trials - 1)) / std::sqrt(static_cast<double>(trials));
    const double axi = std::abs(xi);
    out.bound = (13.0 + std::abs(model.moments.m3)) *
                (axi * axi * axi * axi + axi * axi * axi + axi * axi + 1.0) / n;
    return out;
}

} // namespace rtp
