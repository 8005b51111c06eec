#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rtp/errors.hpp"
#include "rtp/format.hpp"
#include "rtp/rng.hpp"
#include "rtp/trigpoly.hpp"

namespace rtp {

/// sin(tau)/tau with the removable singularity handled by a 5-term Taylor
/// series for |tau| < 1e-4 (absolute error below 1e-30 on that branch).
inline double sinc_cov(double tau) {
    const double a = std::abs(tau);
    if (a < 1e-4) {
        const double t2 = tau * tau;
        return 1.0 + t2 * (-1.0 / 6.0 +
                           t2 * (1.0 / 120.0 + t2 * (-1.0 / 5040.0 + t2 * (1.0 / 362880.0))));
    }
    return std::sin(tau) / tau;
}

/// Kac-Rice expected zero count of the sinc-covariance process on [a,b]:
/// (b-a) * sqrt(-r''(0)) / pi = (b-a) / (pi*sqrt(3)).
inline double expected_zeros(double a, double b) {
    require(b >= a && b - a <= two_pi, "expected_zeros: need 0 <= b-a <= 2*pi");
    return (b - a) / (std::numbers::pi * std::sqrt(3.0));
}

/// One realization of the limit process on a grid.
struct ProcessSample {
    std::vector<double> grid;
    std::vector<double> values;
    std::string method;      // "cholesky" or "spectral"
    std::uint64_t seed = 0;  // derivation key of the stream that drew it
};

/// (t, value) rows for external plotting.
inline void save_csv(const ProcessSample& s, std::ostream& os) {
    os << "t,value\n";
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        os << detail::format_double(s.grid[i]) << ',' << detail::format_double(s.values[i])
           << '\n';
}

/// Zero crossings of a sampled path by sign changes, with the crossing
/// positions refined by a quadratic through the three surrounding samples.
struct PathZeros {
    int count = 0;
    std::vector<double> positions;
};

inline PathZeros count_path_zeros(std::span<const double> grid, std::span<const double> values) {
    PathZeros out;
    for (std::size_t j = 0; j + 1 < values.size(); ++j) {
        const double vA = values[j], vB = values[j + 1];
        if (vA == 0.0) {
            ++out.count;
            out.positions.push_back(grid[j]);
            continue;
        }
        if (vB == 0.0 || (vA > 0.0) == (vB > 0.0)) continue;
        ++out.count;
        double t = grid[j] + (grid[j + 1] - grid[j]) * vA / (vA - vB); // secant
        if (j + 2 < values.size()) {
            // quadratic through samples j, j+1, j+2 in local coordinates s = 0,1,2
            const double c0 = vA;
            const double c2 = (values[j + 2] - 2.0 * vB + vA) / 2.0;
            const double c1 = vB - vA - c2;
            const double disc = c1 * c1 - 4.0 * c2 * c0;
            if (c2 != 0.0 && disc >= 0.0) {
                const double sq = std::sqrt(disc);
                for (double cand : {(-c1 + sq) / (2.0 * c2), (-c1 - sq) / (2.0 * c2)})
                    if (cand >= 0.0 && cand <= 1.0) {
                        t = grid[j] + cand * (grid[j + 1] - grid[j]);
                        break;
                    }
            }
        }
        out.positions.push_back(t);
    }
    if (!values.empty() && values.back() == 0.0) {
        ++out.count;
        out.positions.push_back(grid.back());
    }
    return out;
}

/// Exact covariance of the spectral surrogate with Q midpoint nodes:
/// (1/Q) sum_q cos(lambda_q tau), the midpoint rule for the sinc spectral
/// integral over [0,1]; sup error O(1/Q^2).
inline double spectral_surrogate_cov(int Q, double tau) {
    double acc = 0.0;
    for (int q = 1; q <= Q; ++q) acc += std::cos((q - 0.5) / Q * tau);
    return acc / Q;
}

/// Dense simulator: factorizes r(t_i - t_j) + jitter*I once per grid and
/// reuses the triangular factor across draws. Jitter escalates
/// 1e-10 -> 1e-8 -> 1e-6 before giving up (sinc matrices on fine grids are
/// numerically rank-deficient).
class CholeskySimulator {
public:
    explicit CholeskySimulator(std::vector<double> grid) : grid_(std::move(grid)) {
        require(!grid_.empty() && grid_.size() <= 2048,
                "CholeskySimulator: grid size must be in [1, 2048]");
        for (std::size_t i = 1; i < grid_.size(); ++i)
            require(grid_[i] - grid_[i - 1] >= 1e-3, "CholeskySimulator: grid spacing must be >= 1e-3");

        const auto m = static_cast<Eigen::Index>(grid_.size());
        Eigen::MatrixXd cov(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) cov(i, j) = sinc_cov(grid_[i] - grid_[j]);

        for (double jitter : {1e-10, 1e-8, 1e-6}) {
            Eigen::LLT<Eigen::MatrixXd> llt(cov + jitter * Eigen::MatrixXd::Identity(m, m));
            if (llt.info() == Eigen::Success) {
                factor_ = llt.matrixL();
                return;
            }
        }
        throw numeric_error("CholeskySimulator: factorization failed after jitter escalation");
    }

    ProcessSample sample(RngStream& stream) const {
        const auto m = static_cast<Eigen::Index>(grid_.size());
        Eigen::VectorXd z(m);
        for (Eigen::Index i = 0; i < m; ++i) z(i) = stream.normal();
        const Eigen::VectorXd v = factor_ * z;
        ProcessSample s;
        s.grid = grid_;
        s.values.assign(v.data(), v.data() + m);
        s.method = "cholesky";
        s.seed = stream.key();
        return s;
    }

private:
    std::vector<double> grid_;
    Eigen::MatrixXd factor_;
};

/// Spectral simulator: g(t) = sum_q sqrt(1/Q) (xi_q cos(lambda_q t) +
/// eta_q sin(lambda_q t)) with midpoint nodes lambda_q on [0,1]. Its exact
/// covariance is spectral_surrogate_cov(Q, .).
class SpectralSimulator {
public:
    SpectralSimulator(std::vector<double> grid, int Q) : grid_(std::move(grid)), Q_(Q) {
        require(Q_ >= 64, "SpectralSimulator: need Q >= 64 quadrature nodes");
        ctab_.resize(static_cast<std::size_t>(Q_) * grid_.size());
        stab_.resize(ctab_.size());
        for (int q = 0; q < Q_; ++q) {
            const double lambda = (q + 0.5) / Q_;
            for (std::size_t i = 0; i < grid_.size(); ++i) {
                ctab_[q * grid_.size() + i] = std::cos(lambda * grid_[i]);
                stab_[q * grid_.size() + i] = std::sin(lambda * grid_[i]);
            }
        }
    }

    ProcessSample sample(RngStream& stream) const {
        ProcessSample s;
        s.grid = grid_;
        s.values.assign(grid_.size(), 0.0);
        s.seed = stream.key();
        const double w = 1.0 / std::sqrt(static_cast<double>(Q_));
        for (int q = 0; q < Q_; ++q) {
            const double xi = stream.normal();
            const double eta = stream.normal();
            const double* c = &ctab_[q * grid_.size()];
            const double* sn = &stab_[q * grid_.size()];
            for (std::size_t i = 0; i < grid_.size(); ++i)
                s.values[i] += w * (xi * c[i] + eta * sn[i]);
        }
        s.method = "spectral";
        return s;
    }

private:
    std::vector<double> grid_;
    int Q_;
    std::vector<double> ctab_, stab_;
};

inline ProcessSample simulate_cholesky(std::vector<double> grid, RngStream& stream) {
    return CholeskySimulator(std::move(grid)).sample(stream);
}

inline ProcessSample simulate_spectral(std::vector<double> grid, int Q, RngStream& stream) {
    return SpectralSimulator(std::move(grid), Q).sample(stream);
}

inline std::vector<double> uniform_grid(double a, double b, int size) {
    require(size >= 2, "uniform_grid: need at least 2 points");
    std::vector<double> g(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) g[i] = a + (b - a) * i / (size - 1);
    return g;
}

struct McZeroMean {
    double mean = 0.0;
    double stderr_mean = 0.0;
    double expected = 0.0;
};

/// Monte Carlo mean zero count of the limit process over [a,b].
inline McZeroMean mc_zero_mean(int trials, int grid_size, std::uint64_t master_seed,
                               const std::string& method = "cholesky", double a = 0.0,
                               double b = two_pi, int Q = 256) {
    require(trials >= 500, "mc_zero_mean: need at least 500 trials");
    const std::vector<double> grid = uniform_grid(a, b, grid_size);
    require(grid[1] - grid[0] <= 0.05, "mc_zero_mean: grid spacing must be <= 0.05");
    constexpr std::uint32_t salt = 103;

    std::optional<CholeskySimulator> chol;
    std::optional<SpectralSimulator> spec;
    if (method == "cholesky")
        chol.emplace(grid);
    else if (method == "spectral")
        spec.emplace(grid, Q);
    else
        throw config_error("mc_zero_mean: unknown method '" + method + "'");

    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < trials; ++t) {
        RngStream stream = RngStream::derive(master_seed, RngStream::compose_key(salt, t));
        const ProcessSample s = chol ? chol->sample(stream) : spec->sample(stream);
        const int c = count_path_zeros(s.grid, s.values).count;
        sum += c;
        sumsq += static_cast<double>(c) * c;
    }
    McZeroMean out;
    out.mean = sum / trials;
    const double var = (sumsq - sum * sum / trials) / (trials - 1);
    out.stderr_mean = std::sqrt(std::max(var, 0.0) / trials);
    out.expected = expected_zeros(a, b);
    return out;
}

} // namespace rtp
