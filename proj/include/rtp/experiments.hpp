#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "rtp/coeffs.hpp"
#include "rtp/dists.hpp"
#include "rtp/errors.hpp"
#include "rtp/sincgp.hpp"
#include "rtp/trigpoly.hpp"
#include "rtp/zeros.hpp"

namespace rtp {

inline constexpr double nodal_density = 0.18377629847393068; // 1/(pi*sqrt(3))

/// Density p(x) = (1 + sum_j c_j cos(jx)) / (2*pi) on [0, 2*pi]. Finitely
/// many cosine modes keep the Fourier-decay hypothesis trivially true:
/// |P_X^(k)| = |c_k|/2 for k <= J and 0 beyond.
class NonUniformDensity {
public:
    explicit NonUniformDensity(std::vector<double> cosine_coeffs)
        : c_(std::move(cosine_coeffs)) {
        double total = 0.0;
        for (double cj : c_) total += std::abs(cj);
        if (total >= 1.0)
            throw config_error("NonUniformDensity: sum |c_j| must be < 1 (density positivity)");
    }

    const std::vector<double>& coeffs() const { return c_; }

    double pdf(double x) const {
        double s = 1.0;
        for (std::size_t j = 0; j < c_.size(); ++j) s += c_[j] * std::cos((j + 1) * x);
        return s / two_pi;
    }

    /// Closed-form CDF on [0, 2*pi]: (x + sum_j c_j sin(jx)/j) / (2*pi).
    double cdf(double x) const {
        double s = x;
        for (std::size_t j = 0; j < c_.size(); ++j) s += c_[j] * std::sin((j + 1) * x) / (j + 1);
        return s / two_pi;
    }

    /// E[e^{ikX}] is real here: c_|k|/2 for 1 <= |k| <= J, 1 at k = 0, else 0.
    double fourier_coefficient(int k) const {
        const int ak = std::abs(k);
        if (ak == 0) return 1.0;
        if (ak <= static_cast<int>(c_.size())) return c_[ak - 1] / 2.0;
        return 0.0;
    }

    /// Inverse-CDF sampling on a 2^14-point monotone linear interpolant.
    std::vector<double> sample(int count, RngStream& stream) const {
        constexpr int table_size = 1 << 14;
        std::vector<double> cdf_table(table_size + 1);
        for (int i = 0; i <= table_size; ++i) cdf_table[i] = cdf(two_pi * i / table_size);
        cdf_table[table_size] = 1.0;

        std::vector<double> out(static_cast<std::size_t>(count));
        for (int s = 0; s < count; ++s) {
            const double u = stream.uniform01();
            const auto it = std::upper_bound(cdf_table.begin(), cdf_table.end(), u);
            const int hi = std::max<int>(1, static_cast<int>(it - cdf_table.begin()));
            const double u0 = cdf_table[hi - 1], u1 = cdf_table[hi];
            const double frac = (u1 > u0) ? (u - u0) / (u1 - u0) : 0.0;
            out[s] = two_pi * (hi - 1 + frac) / table_size;
        }
        return out;
    }

private:
    std::vector<double> c_;
};

namespace detail {

/// One coefficient draw of length max(n_list); the polynomial at each n is
/// its prefix, matching the almost-sure setting (a single omega, growing n).
inline std::vector<TrigPolynomial> prefix_polynomials(const CoefficientModel& model,
                                                      const std::vector<int>& n_list,
                                                      RngStream& stream) {
    require(!n_list.empty() && std::is_sorted(n_list.begin(), n_list.end()),
            "n_list must be nonempty and increasing");
    const int n_max = n_list.back();
    std::vector<double> a, b;
    sample_pair_sequence(model, n_max, stream, a, b);
    std::vector<TrigPolynomial> out;
    out.reserve(n_list.size());
    for (int n : n_list)
        out.emplace_back(std::vector<double>(a.begin(), a.begin() + n),
                         std::vector<double>(b.begin(), b.begin() + n));
    return out;
}

inline int grid_size_for(int n, int grid_factor) {
    return static_cast<int>(next_power_of_two(
        std::max<std::size_t>(static_cast<std::size_t>(grid_factor) * n, 64)));
}

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = (syy > 0.0) ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

} // namespace detail

// --- Stream salts. Each experiment kind draws from its own key space so no
// --- two purposes share a stream within one master seed.
namespace salt {
inline constexpr std::uint32_t nodal_convergence = 1;
inline constexpr std::uint32_t nodal_average = 2;
inline constexpr std::uint32_t local_poly = 3;
inline constexpr std::uint32_t local_x = 4;
inline constexpr std::uint32_t local_gp = 5;
inline constexpr std::uint32_t moments = 6;
inline constexpr std::uint32_t log_moments = 7;
inline constexpr std::uint32_t nonuniform_poly = 8;
inline constexpr std::uint32_t nonuniform_x = 9;
inline constexpr std::uint32_t uniformity = 10;
inline constexpr std::uint32_t rate = 11;
inline constexpr std::uint32_t covariance = 12;
inline constexpr std::uint32_t tv_scan = 13;
inline constexpr std::uint32_t oracle = 14;
inline constexpr std::uint32_t distances = 15;
inline constexpr std::uint32_t window = 16;
} // namespace salt

// ---------------------------------------------------------------------------

struct NodalRow {
    int n = 0;
    int count = 0;
    double ratio = 0.0; // N/n
    double limit = 0.0; // (b-a)/(pi*sqrt(3))
    int flagged_cells = 0;
};

/// Almost-sure nodal density: one coefficient sequence, N(f_n, [a,b])/n per n.
inline std::vector<NodalRow> nodal_convergence(const CoefficientModel& model,
                                               const std::vector<int>& n_list, Interval interval,
                                               std::uint64_t master_seed, int oversample = 32) {
    require(model.symmetric, "nodal experiments assume a symmetric coefficient law");
    RngStream stream = RngStream::derive(master_seed, RngStream::compose_key(salt::nodal_convergence, 0));
    const auto polys = detail::prefix_polynomials(model, n_list, stream);
    const double limit = interval.length * nodal_density;

    std::vector<NodalRow> rows;
    for (std::size_t i = 0; i < polys.size(); ++i) {
        const auto rep = count_zeros_grid(polys[i], interval, oversample);
        rows.push_back({n_list[i], rep.count, static_cast<double>(rep.count) / n_list[i], limit,
                        static_cast<int>(rep.suspicious_intervals.size())});
    }
    return rows;
}

struct NodalAverage {
    double mean = 0.0;
    double stderr_mean = 0.0;
    double limit = 0.0;
    std::vector<double> ratios;
    int flagged_trials = 0;
};

/// Mean of N/n over independent coefficient draws at a fixed n.
inline NodalAverage nodal_average(const CoefficientModel& model, int n, int trials,
                                  Interval interval, std::uint64_t master_seed,
                                  int oversample = 32) {
    require(trials >= 1, "nodal_average: trials must be >= 1");
    require(model.symmetric, "nodal experiments assume a symmetric coefficient law");
    NodalAverage out;
    out.limit = interval.length * nodal_density;
    for (int t = 0; t < trials; ++t) {
        RngStream stream = RngStream::derive(master_seed, RngStream::compose_key(salt::nodal_average, t));
        const auto p = sample_polynomial(model, n, stream);
        const auto rep = count_zeros_grid(p, interval, oversample);
        if (rep.flagged()) {
            ++out.flagged_trials;
            continue;
        }
        out.ratios.push_back(static_cast<double>(rep.count) / n);
    }
    if (out.ratios.empty()) throw numeric_error("nodal_average: every trial was flagged");
    const double m = static_cast<double>(out.ratios.size());
    out.mean = std::accumulate(out.ratios.begin(), out.ratios.end(), 0.0) / m;
    double var = 0.0;
    for (double r : out.ratios) var += (r - out.mean) * (r - out.mean);
    out.stderr_mean = (out.ratios.size() > 1) ? std::sqrt(var / (m - 1.0) / m) : 0.0;
    return out;
}

struct LocalZeroDistribution {
    std::vector<double> hist_n;  // P_X(N(g_n)=k), k = 0,1,...
    std::vector<double> hist_gp; // same for the limit process
    double mean_n = 0.0;
    double mean_gp = 0.0;
    double tv = 0.0; // total variation between the two integer histograms
};

/// Law of N(g_n,[0,2*pi]) under P_X for one fixed polynomial, against the
/// zero count of the sinc-covariance limit process.
inline LocalZeroDistribution local_zero_distribution(const CoefficientModel& model, int n,
                                                     int x_samples, int gp_trials, int gp_grid,
                                                     std::uint64_t master_seed) {
    require(x_samples >= 1 && gp_trials >= 1, "local_zero_distribution: need samples");
    RngStream pstream = RngStream::derive(master_seed, RngStream::compose_key(salt::local_poly, 0));
    const auto p = sample_polynomial(model, n, pstream);
    const auto scan = detail::scan_all_roots(p, 32);

    std::vector<int> counts_n;
    counts_n.reserve(static_cast<std::size_t>(x_samples));
    RngStream xstream = RngStream::derive(master_seed, RngStream::compose_key(salt::local_x, 0));
    const double h = two_pi / n;
    for (int s = 0; s < x_samples; ++s) {
        const double X = xstream.uniform(0.0, two_pi);
        // N(g_n,[0,2*pi]) = N(f_n,[X, X+2*pi/n]); at n = 1 that is one full period
        const int c = (n == 1) ? static_cast<int>(scan.roots.size())
                               : detail::count_in_window(scan.roots, Interval::window(X, h));
        counts_n.push_back(c);
    }

    const CholeskySimulator sim(uniform_grid(0.0, two_pi, gp_grid));
    std::vector<int> counts_gp;
    counts_gp.reserve(static_cast<std::size_t>(gp_trials));
    for (int t = 0; t < gp_trials; ++t) {
        RngStream gstream = RngStream::derive(master_seed, RngStream::compose_key(salt::local_gp, t));
        const auto sample = sim.sample(gstream);
        counts_gp.push_back(count_path_zeros(sample.grid, sample.values).count);
    }

    LocalZeroDistribution out;
    const int kmax = std::max(*std::max_element(counts_n.begin(), counts_n.end()),
                              *std::max_element(counts_gp.begin(), counts_gp.end()));
    out.hist_n.assign(kmax + 1, 0.0);
    out.hist_gp.assign(kmax + 1, 0.0);
    for (int c : counts_n) out.hist_n[c] += 1.0 / x_samples;
    for (int c : counts_gp) out.hist_gp[c] += 1.0 / gp_trials;
    for (int c : counts_n) out.mean_n += static_cast<double>(c) / x_samples;
    for (int c : counts_gp) out.mean_gp += static_cast<double>(c) / gp_trials;
    for (int k = 0; k <= kmax; ++k) out.tv += 0.5 * std::abs(out.hist_n[k] - out.hist_gp[k]);
    return out;
}

struct MomentRow {
    int n = 0;
    int p = 0;
    double value = 0.0; // E_X[N(g_n,[0,2*pi])^p] by X-grid quadrature
};

/// Grid-quadrature moments of the local zero count, one polynomial per n
/// (prefixes of a single draw). The X grid size is a multiple of n so the
/// p = 1 column reproduces N/n exactly up to endpoint effects.
inline std::vector<MomentRow> local_moment_boundedness(const CoefficientModel& model,
                                                       const std::vector<int>& n_list,
                                                       const std::vector<int>& p_list,
                                                       std::uint64_t master_seed) {
    for (int p : p_list)
        require(p >= 1 && p <= 4, "local_moment_boundedness: p_list must lie in {1,2,3,4}");
    RngStream stream = RngStream::derive(master_seed, RngStream::compose_key(salt::moments, 0));
    const auto polys = detail::prefix_polynomials(model, n_list, stream);

    std::vector<MomentRow> rows;
    for (std::size_t i = 0; i < polys.size(); ++i) {
        const int n = n_list[i];
        const auto scan = detail::scan_all_roots(polys[i], 32);
        const int mx = n * std::max(8, (2048 + n - 1) / n);
        const double h = two_pi / n;
        std::vector<double> sums(p_list.size(), 0.0);
        for (int j = 0; j < mx; ++j) {
            const double X = (j + 0.5) * two_pi / mx;
            const int c = (n == 1) ? static_cast<int>(scan.roots.size())
                                   : detail::count_in_window(scan.roots, Interval::window(X, h));
            for (std::size_t q = 0; q < p_list.size(); ++q)
                sums[q] += std::pow(static_cast<double>(c), p_list[q]);
        }
        for (std::size_t q = 0; q < p_list.size(); ++q)
            rows.push_back({n, p_list[q], sums[q] / mx});
    }
    return rows;
}

struct LogMomentRow {
    int n = 0;
    double value = 0.0; // E_X[|log|f_n(X)||^p] by grid quadrature
    long excluded = 0;  // grid points with |f| < 1e-300 (counted, expect 0)
};

inline std::vector<LogMomentRow> log_moment_scan(const CoefficientModel& model,
                                                 const std::vector<int>& n_list, int p,
                                                 std::uint64_t master_seed, int grid_factor = 16) {
    require(p >= 1, "log_moment_scan: p must be >= 1");
    require(grid_factor >= 16, "log_moment_scan: grid must be at least 16n to resolve near-zeros");
    RngStream stream = RngStream::derive(master_seed, RngStream::compose_key(salt::log_moments, 0));
    const auto polys = detail::prefix_polynomials(model, n_list, stream);

    std::vector<LogMomentRow> rows;
    for (std::size_t i = 0; i < polys.size(); ++i) {
        const auto g = eval_grid(polys[i], detail::grid_size_for(n_list[i], grid_factor));
        LogMomentRow row;
        row.n = n_list[i];
        double acc = 0.0;
        long used = 0;
        for (double v : g.values) {
            const double av = std::abs(v);
            if (av < 1e-300) {
                ++row.excluded;
                continue;
            }
            acc += std::pow(std::abs(std::log(av)), p);
            ++used;
        }
        row.value = acc / std::max<long>(used, 1);
        rows.push_back(row);
    }
    return rows;
}

/// Kolmogorov distance of f_n(X) to the Gaussian for X drawn from a
/// non-uniform cosine density.
inline double nonuniform_clt(const CoefficientModel& model, const NonUniformDensity& density,
                             int n, int samples, std::uint64_t master_seed) {
    require(samples >= 100000, "nonuniform_clt: need at least 1e5 samples");
    RngStream pstream = RngStream::derive(master_seed, RngStream::compose_key(salt::nonuniform_poly, 0));
    const auto p = sample_polynomial(model, n, pstream);
    RngStream xstream = RngStream::derive(master_seed, RngStream::compose_key(salt::nonuniform_x, 0));
    const auto xs = density.sample(samples, xstream);
    std::vector<double> values(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) values[i] = detail::eval_fast(p, xs[i]);
    return kolmogorov_to_gaussian(values);
}

/// sup_b |count_b/N - 1/bins| for the root histogram over equal bins.
inline double empirical_measure_uniformity(const ZeroReport& report, int bins) {
    require(bins >= 1, "empirical_measure_uniformity: bins must be >= 1");
    if (bins > 1) require(report.count >= 10 * bins, "empirical_measure_uniformity: need N >= 10*bins");
    std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
    for (double r : report.roots) {
        int b = static_cast<int>(r / two_pi * bins);
        b = std::clamp(b, 0, bins - 1);
        hist[b] += 1.0;
    }
    double sup = 0.0;
    for (double hcount : hist)
        sup = std::max(sup, std::abs(hcount / report.count - 1.0 / bins));
    return sup;
}

inline double empirical_measure_uniformity(const TrigPolynomial& p, int bins) {
    return empirical_measure_uniformity(count_zeros_grid(p), bins);
}

enum class RateMetric { kolmogorov, cf, c3_proxy };

inline const std::vector<double>& default_xi_grid() {
    static const std::vector<double> grid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
    return grid;
}

inline double cf_deviation(std::span<const double> values, const std::vector<double>& xi_grid) {
    double sup = 0.0;
    for (double xi : xi_grid) {
        const auto cf = empirical_cf(values, xi);
        sup = std::max(sup, std::abs(cf - std::complex<double>(std::exp(-0.5 * xi * xi), 0.0)));
    }
    return sup;
}

struct RateRegression {
    detail::LineFit fit;
    std::vector<std::pair<int, double>> means; // (n, mean metric)
    bool strictly_decreasing = true;
};

/// Log-log regression of the mean distance metric against n.
inline RateRegression rate_regression(const CoefficientModel& model,
                                      const std::vector<int>& n_list, int trials,
                                      RateMetric metric, std::uint64_t master_seed,
                                      int grid_factor = 16) {
    require(n_list.size() >= 3, "rate_regression: need at least 3 sizes");
    require(trials >= 1, "rate_regression: trials must be >= 1");
    const auto fam = TestFunctionFamily::standard();

    RateRegression out;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const int n = n_list[i];
        const int M = detail::grid_size_for(n, grid_factor);
        double acc = 0.0;
        for (int t = 0; t < trials; ++t) {
            RngStream stream = RngStream::derive(
                master_seed, RngStream::compose_key(salt::rate, static_cast<std::uint32_t>(i) * 65536 + t));
            const auto p = sample_polynomial(model, n, stream);
            const auto g = eval_grid(p, M);
            switch (metric) {
            case RateMetric::kolmogorov: acc += kolmogorov_to_gaussian(g.values); break;
            case RateMetric::cf: acc += cf_deviation(g.values, default_xi_grid()); break;
            case RateMetric::c3_proxy: acc += c3_proxy_distance(g.values, fam); break;
            }
        }
        const double mean = acc / trials;
        if (!out.means.empty() && mean >= out.means.back().second)
            out.strictly_decreasing = false;
        out.means.emplace_back(n, mean);
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(mean));
    }
    out.fit = detail::fit_line(lx, ly);
    return out;
}

/// Full distance report for one polynomial realization.
inline DistanceReport distance_report(const TrigPolynomial& p, int grid_factor = 16) {
    DistanceReport rep;
    rep.n = p.n();
    rep.grid_M = detail::grid_size_for(p.n(), grid_factor);
    const auto g = eval_grid(p, rep.grid_M);
    rep.kolmogorov = kolmogorov_to_gaussian(g.values);
    rep.cf_deviation = cf_deviation(g.values, default_xi_grid());
    rep.tv = tv_to_gaussian(g.values);
    rep.c3_proxy = c3_proxy_distance(g.values, TestFunctionFamily::standard());
    return rep;
}

} // namespace rtp
