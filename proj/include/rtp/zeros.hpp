#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rtp/errors.hpp"
#include "rtp/trigpoly.hpp"

namespace rtp {

/// Half-open arc [lo, lo+length) on the circle [0, 2*pi); wrap-around allowed.
struct Interval {
    double lo = 0.0;
    double length = two_pi;

    static Interval full() { return {0.0, two_pi}; }

    /// [a, b) with wrap when b <= a (b == a means the full circle).
    static Interval from_endpoints(double a, double b) {
        Interval iv;
        iv.lo = reduce_angle(a);
        const double len = reduce_angle(b - a);
        iv.length = (len == 0.0) ? two_pi : len;
        return iv;
    }

    static Interval window(double X, double h) {
        require(h > 0.0 && h < two_pi, "Interval::window: need 0 < h < 2*pi");
        return {reduce_angle(X), h};
    }

    bool contains(double t) const { return reduce_angle(t - lo) < length; }
    double hi() const { return lo + length; }
};

struct ZeroReport {
    enum class Method { grid, companion };

    Interval interval;
    int count = 0;
    std::vector<double> roots; // sorted, positions in [0, 2*pi)
    double tolerance = 1e-8;   // residual bound: |f(root)| <= tolerance * max_grid|f|
    std::vector<std::pair<double, double>> suspicious_intervals;
    Method method = Method::grid;

    bool flagged() const { return !suspicious_intervals.empty(); }
};

namespace detail {

/// Root refinement inside a sign-change bracket: bisection with a Newton
/// acceleration step when it stays inside the bracket. Terminates once the
/// bracket width is below 1e-12, so the returned midpoint is within 1e-12
/// of the zero.
inline double refine_root(const TrigPolynomial& p, double lo, double hi, double flo) {
    constexpr double width_tol = 1e-12;
    for (int iter = 0; iter < 80 && hi - lo > width_tol; ++iter) {
        double t = 0.5 * (lo + hi);
        const auto [f, df] = eval_pair(p, t);
        if (f == 0.0) return t;
        if ((f > 0.0) == (flo > 0.0)) {
            lo = t;
            flo = f;
        } else {
            hi = t;
        }
        if (df != 0.0) {
            const double tn = t - f / df;
            if (tn > lo && tn < hi) {
                const auto [fn, dfn] = eval_pair(p, tn);
                (void)dfn;
                if (fn == 0.0) return tn;
                if ((fn > 0.0) == (flo > 0.0)) {
                    lo = tn;
                    flo = fn;
                } else {
                    hi = tn;
                }
            }
        }
    }
    return 0.5 * (lo + hi);
}

struct GridScan {
    std::vector<double> roots;
    std::vector<std::pair<double, double>> suspicious;
    double max_abs = 0.0;
    int grid_size = 0;
};

/// Subdivision of a no-sign-change cell flagged by the Bernstein criterion
/// min(|vA|,|vB|) < 2*w*n*max|f| (|f'| <= n*max|f| for degree-n trig
/// polynomials, so a cell violating it could hide a pair of zeros). A cell
/// whose low endpoint is already explained by a refined root within one cell
/// width is discharged instead of being split further. True tangencies make
/// the suspicious region shrink like sqrt(width), so an evaluation budget
/// cuts the recursion off and flags the unresolved cell.
inline void scan_cell(const TrigPolynomial& p, double tA, double vA, double tB, double vB,
                      double bernstein, int depth, int max_depth, int& eval_budget,
                      const std::vector<double>& known_roots, GridScan& out) {
    if (vA == 0.0 || vB == 0.0) {
        // Exact grid zeros are handled by the caller; reaching one here means
        // a tangency at machine level.
        out.suspicious.emplace_back(tA, tB);
        return;
    }
    if ((vA > 0.0) != (vB > 0.0)) {
        out.roots.push_back(refine_root(p, tA, tB, vA));
        return;
    }
    const double w = tB - tA;
    // a zero at x0 forces |vA| <= B(x0-tA) and |vB| <= B(tB-x0), hence
    // |vA|+|vB| <= w*B; anything above that certifies the cell zero-free
    if (std::abs(vA) + std::abs(vB) > w * bernstein) return;

    const auto near_root = [&](double t, double dist) {
        auto it = std::lower_bound(out.roots.begin(), out.roots.end(), t - dist);
        if (it != out.roots.end() && *it <= t + dist) return true;
        auto jt = std::lower_bound(known_roots.begin(), known_roots.end(), t - dist);
        return jt != known_roots.end() && *jt <= t + dist;
    };
    if (near_root(tA, w) || near_root(tB, w)) return; // smallness explained by a counted zero

    if (depth >= max_depth || eval_budget <= 0) {
        out.suspicious.emplace_back(tA, tB);
        return;
    }
    const double tM = 0.5 * (tA + tB);
    const double vM = eval_pair(p, tM).first;
    --eval_budget;
    scan_cell(p, tA, vA, tM, vM, bernstein, depth + 1, max_depth, eval_budget, known_roots, out);
    scan_cell(p, tM, vM, tB, vB, bernstein, depth + 1, max_depth, eval_budget, known_roots, out);
}

inline std::vector<std::pair<double, double>> merge_intervals(
    std::vector<std::pair<double, double>> ivs) {
    std::sort(ivs.begin(), ivs.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& iv : ivs) {
        if (!merged.empty() && iv.first <= merged.back().second + 1e-12)
            merged.back().second = std::max(merged.back().second, iv.second);
        else
            merged.push_back(iv);
    }
    return merged;
}

/// Locates every zero of f_n on [0, 2*pi): sign-change cells refined first,
/// then the Bernstein sweep over the remaining cells.
inline GridScan scan_all_roots(const TrigPolynomial& p, int oversample, int max_depth = 30) {
    require(oversample >= 8, "count_zeros_grid: oversample must be >= 8");
    if (p.is_zero()) throw numeric_error("count_zeros_grid: all-zero polynomial is degenerate");

    const int n = p.n();
    const std::size_t m_target =
        std::max<std::size_t>({static_cast<std::size_t>(oversample) * n,
                               static_cast<std::size_t>(2 * n + 2), 64});
    const int M = static_cast<int>(next_power_of_two(m_target));
    const GridEvaluation g = eval_grid(p, M);

    GridScan out;
    out.grid_size = M;
    out.max_abs = g.max_abs();
    // ||f||_inf <= max_grid|f| / cos(pi n / M) for trig polynomials sampled
    // at M > 2n points, so this keeps the derivative bound rigorous.
    const double bernstein =
        n * out.max_abs / std::cos(std::numbers::pi * n / M);
    const double w = two_pi / M;

    std::vector<int> pending; // cells with no sign change, revisited after roots are known
    for (int j = 0; j < M; ++j) {
        const double vA = g.values[j];
        const double vB = g.values[(j + 1) % M];
        if (vA == 0.0) {
            out.roots.push_back(g.point(j));
            continue;
        }
        if (vB == 0.0) continue; // owned by the next cell
        if ((vA > 0.0) != (vB > 0.0))
            out.roots.push_back(refine_root(p, g.point(j), g.point(j) + w, vA));
        else if (std::abs(vA) + std::abs(vB) <= w * bernstein)
            pending.push_back(j);
    }
    std::sort(out.roots.begin(), out.roots.end());

    const std::vector<double> first_pass = out.roots;
    // Shared subdivision budget: certifying a shallow valley costs about
    // 8*B/sqrt(q*m) midpoint evaluations (m the dip depth, q the local
    // curvature), a few 1e4 at desk scales. Only a machine-level tangency
    // exhausts this and stays flagged.
    int eval_budget = 1000000;
    for (int j : pending) {
        GridScan local;
        scan_cell(p, g.point(j), g.values[j], g.point(j) + w, g.values[(j + 1) % M], bernstein,
                  0, max_depth, eval_budget, first_pass, local);
        out.roots.insert(out.roots.end(), local.roots.begin(), local.roots.end());
        out.suspicious.insert(out.suspicious.end(), local.suspicious.begin(),
                              local.suspicious.end());
    }
    std::sort(out.roots.begin(), out.roots.end());

    // Discharge flags sitting within one own-width of a refined root: the
    // recursion may have visited such a cell before the root was known. A
    // genuine extra pair hiding that close to a counted zero has measure
    // zero under continuous coefficient laws.
    out.suspicious = merge_intervals(std::move(out.suspicious));
    std::erase_if(out.suspicious, [&](const std::pair<double, double>& iv) {
        const double margin = iv.second - iv.first;
        auto it = std::lower_bound(out.roots.begin(), out.roots.end(), iv.first - margin);
        return it != out.roots.end() && *it <= iv.second + margin;
    });

    // Merge duplicate findings of one zero sitting on a shared grid point
    // (refinement error is ~1e-12, genuinely distinct zeros this close have
    // probability ~0 for continuous coefficient laws).
    constexpr double dup_gap = 1e-9;
    std::vector<double> dedup;
    for (double r : out.roots)
        if (dedup.empty() || r - dedup.back() > dup_gap) dedup.push_back(r);
    if (dedup.size() >= 2 && (dedup.front() + two_pi - dedup.back()) <= dup_gap)
        dedup.pop_back();
    out.roots = std::move(dedup);
    return out;
}

inline int count_in_window(const std::vector<double>& sorted_roots, const Interval& iv) {
    const auto count_range = [&](double a, double b) {
        const auto lo = std::lower_bound(sorted_roots.begin(), sorted_roots.end(), a);
        const auto hi = std::lower_bound(sorted_roots.begin(), sorted_roots.end(), b);
        return static_cast<int>(hi - lo);
    };
    const double end = iv.hi();
    if (end <= two_pi) return count_range(iv.lo, end);
    return count_range(iv.lo, two_pi) + count_range(0.0, end - two_pi);
}

} // namespace detail

/// Grid-based certified zero count on an interval of the circle. The full
/// grid is always evaluated (the Bernstein bound needs the global max), the
/// report is then restricted to the requested interval.
inline ZeroReport count_zeros_grid(const TrigPolynomial& p, Interval interval = Interval::full(),
                                   int oversample = 32) {
    require(interval.length > 0.0 && interval.length <= two_pi,
            "count_zeros_grid: interval length must be in (0, 2*pi]");
    const detail::GridScan scan = detail::scan_all_roots(p, oversample);

    ZeroReport rep;
    rep.interval = interval;
    rep.method = ZeroReport::Method::grid;
    for (double r : scan.roots)
        if (interval.contains(r)) rep.roots.push_back(r);
    for (const auto& [a, b] : scan.suspicious)
        if (interval.contains(a) || interval.contains(b)) rep.suspicious_intervals.emplace_back(a, b);
    rep.count = static_cast<int>(rep.roots.size());
    if (rep.count > 2 * p.n())
        throw numeric_error("count_zeros_grid: count exceeds the 2n degree bound");
    return rep;
}

/// Oracle: lifts f_n to the degree-2n algebraic polynomial
///   P(z) = sum_k (a_k - i b_k) z^{n+k} + (a_k + i b_k) z^{n-k},
/// which satisfies P(e^{it}) = 2 sqrt(n) e^{int} f_n(t), and counts the
/// companion-matrix eigenvalues within 1e-6 of the unit circle. Dense
/// eigenvalue cost caps it at n <= 128.
inline ZeroReport count_zeros_companion(const TrigPolynomial& p) {
    const int n = p.n();
    require(n <= 128, "count_zeros_companion: n must be <= 128");
    if (p.is_zero()) throw numeric_error("count_zeros_companion: all-zero polynomial is degenerate");

    std::vector<std::complex<double>> c(2 * n + 1, {0.0, 0.0});
    for (int k = 1; k <= n; ++k) {
        c[n + k] = {p.a()[k - 1], -p.b()[k - 1]};
        c[n - k] = {p.a()[k - 1], p.b()[k - 1]};
    }
    int hi = 2 * n, lo = 0;
    while (hi > 0 && std::abs(c[hi]) == 0.0) --hi;
    while (lo < hi && std::abs(c[lo]) == 0.0) ++lo; // z = 0 roots, never on the circle

    ZeroReport rep;
    rep.interval = Interval::full();
    rep.method = ZeroReport::Method::companion;
    const int deg = hi - lo;
    if (deg == 0) return rep;

    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[lo + i] / c[hi];

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw numeric_error("count_zeros_companion: eigenvalue iteration failed");

    constexpr double circle_tol = 1e-6;
    constexpr double ambiguity_band = 1e-4;
    for (int i = 0; i < deg; ++i) {
        const std::complex<double> z = solver.eigenvalues()(i);
        const double dev = std::abs(std::abs(z) - 1.0);
        const double t = reduce_angle(std::atan2(z.imag(), z.real()));
        if (dev < circle_tol)
            rep.roots.push_back(t);
        else if (dev < ambiguity_band)
            rep.suspicious_intervals.emplace_back(t, t); // just off the circle: ambiguous
    }
    std::sort(rep.roots.begin(), rep.roots.end());
    rep.count = static_cast<int>(rep.roots.size());

    // Roots closer than the circle tolerance are indistinguishable from a
    // multiple root; the simple-root assumption no longer holds, flag them.
    for (std::size_t i = 0; i + 1 < rep.roots.size(); ++i)
        if (rep.roots[i + 1] - rep.roots[i] < circle_tol)
            rep.suspicious_intervals.emplace_back(rep.roots[i], rep.roots[i + 1]);
    if (rep.roots.size() >= 2 && rep.roots.front() + two_pi - rep.roots.back() < circle_tol)
        rep.suspicious_intervals.emplace_back(rep.roots.back(), rep.roots.front() + two_pi);
    return rep;
}

/// N(f_n, [X, X+h)) with wrap-around mod 2*pi.
inline int window_count(const TrigPolynomial& p, double X, double h, int oversample = 32) {
    require(h > 0.0 && h < two_pi, "window_count: need 0 < h < 2*pi");
    const detail::GridScan scan = detail::scan_all_roots(p, oversample);
    return detail::count_in_window(scan.roots, Interval::window(X, h));
}

struct WindowIdentity {
    double lhs = 0.0; // (h / 2*pi) * N(f_n, [0, 2*pi))
    double rhs = 0.0; // mean window count over the X grid
};

/// Checks the exact identity (h/2*pi) N(f,[0,2*pi]) = E_X[N(f,[X,X+h])] by
/// quadrature over MX window positions, offset by half a grid step so no X
/// lands on a root.
inline WindowIdentity window_identity_check(const TrigPolynomial& p, double h, int MX,
                                            int oversample = 32) {
    require(MX >= 1024, "window_identity_check: MX must be >= 1024");
    require(h > 0.0 && h < two_pi, "window_identity_check: need 0 < h < 2*pi");
    const detail::GridScan scan = detail::scan_all_roots(p, oversample);

    WindowIdentity wi;
    wi.lhs = h / two_pi * static_cast<double>(scan.roots.size());
    double acc = 0.0;
    for (int i = 0; i < MX; ++i) {
        const double X = (i + 0.5) * two_pi / MX;
        acc += detail::count_in_window(scan.roots, Interval::window(X, h));
    }
    wi.rhs = acc / MX;
    return wi;
}

} // namespace rtp
