#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rtp/coeffs.hpp"
#include "rtp/errors.hpp"
#include "rtp/fft.hpp"
#include "rtp/format.hpp"
#include "rtp/rng.hpp"

namespace rtp {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// t mod 2*pi, result in [0, 2*pi).
inline double reduce_angle(double t) {
    double r = std::fmod(t, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

/// One realization of f_n(t) = n^{-1/2} * sum_k a_k cos(kt) + b_k sin(kt).
/// The 1/sqrt(n) factor is applied at evaluation so integer-valued
/// coefficient arrays (Rademacher) stay exact. Immutable after construction.
class TrigPolynomial {
public:
    TrigPolynomial(std::vector<double> a, std::vector<double> b)
        : a_(std::move(a)), b_(std::move(b)) {
        require(!a_.empty() && a_.size() == b_.size(),
                "TrigPolynomial: coefficient arrays must be nonempty and equally sized");
        for (std::size_t i = 0; i < a_.size(); ++i)
            require(std::isfinite(a_[i]) && std::isfinite(b_[i]),
                    "TrigPolynomial: coefficients must be finite");
        inv_sqrt_n_ = 1.0 / std::sqrt(static_cast<double>(a_.size()));
    }

    int n() const { return static_cast<int>(a_.size()); }
    std::span<const double> a() const { return a_; }
    std::span<const double> b() const { return b_; }
    double inv_sqrt_n() const { return inv_sqrt_n_; }

    bool is_zero() const {
        for (std::size_t i = 0; i < a_.size(); ++i)
            if (a_[i] != 0.0 || b_[i] != 0.0) return false;
        return true;
    }

private:
    std::vector<double> a_, b_;
    double inv_sqrt_n_ = 1.0;
};

inline TrigPolynomial sample_polynomial(const CoefficientModel& model, int n, RngStream& stream) {
    std::vector<double> a, b;
    sample_pair_sequence(model, n, stream, a, b);
    return TrigPolynomial(std::move(a), std::move(b));
}

/// f_n(t) by direct summation, each angle k*t reduced mod 2*pi before the
/// trig calls so the argument error stays bounded for k up to 1e6.
inline double eval(const TrigPolynomial& p, double t) {
    const double tr = reduce_angle(t);
    const auto a = p.a();
    const auto b = p.b();
    double acc = 0.0, comp = 0.0; // Neumaier compensation
    for (int k = 1; k <= p.n(); ++k) {
        const double ang = std::fmod(k * tr, two_pi);
        const double term = a[k - 1] * std::cos(ang) + b[k - 1] * std::sin(ang);
        const double s = acc + term;
        comp += (std::abs(acc) >= std::abs(term)) ? (acc - s) + term : (term - s) + acc;
        acc = s;
    }
    return (acc + comp) * p.inv_sqrt_n();
}

/// f_n'(t), same summation scheme.
inline double eval_derivative(const TrigPolynomial& p, double t) {
    const double tr = reduce_angle(t);
    const auto a = p.a();
    const auto b = p.b();
    double acc = 0.0;
    for (int k = 1; k <= p.n(); ++k) {
        const double ang = std::fmod(k * tr, two_pi);
        acc += k * (b[k - 1] * std::cos(ang) - a[k - 1] * std::sin(ang));
    }
    return acc * p.inv_sqrt_n();
}

namespace detail {

/// Fast single-point evaluation of (f, f') via the rotation recurrence
/// z_k = z_{k-1} * e^{it}, with a fmod-based resync every 256 steps to keep
/// the accumulated phase error below ~1e-12 for any n. Used in hot loops
/// (root refinement, bulk sampling); agrees with eval() to ~1e-11.
inline std::pair<double, double> eval_pair(const TrigPolynomial& p, double t) {
    const double tr = reduce_angle(t);
    const auto a = p.a();
    const auto b = p.b();
    const std::complex<double> w(std::cos(tr), std::sin(tr));
    std::complex<double> z = w;
    double f = 0.0, df = 0.0;
    for (int k = 1; k <= p.n(); ++k) {
        if ((k & 255) == 0) {
            const double ang = std::fmod(k * tr, two_pi);
            z = {std::cos(ang), std::sin(ang)};
        }
        const double c = z.real(), s = z.imag();
        f += a[k - 1] * c + b[k - 1] * s;
        df += k * (b[k - 1] * c - a[k - 1] * s);
        z *= w;
    }
    return {f * p.inv_sqrt_n(), df * p.inv_sqrt_n()};
}

inline double eval_fast(const TrigPolynomial& p, double t) { return eval_pair(p, t).first; }

} // namespace detail

/// Values of f_n (and optionally f_n') on the uniform grid t_j = 2*pi*j/M.
struct GridEvaluation {
    int M = 0;
    std::vector<double> values;
    std::vector<double> derivative_values; // empty unless requested

    double point(int j) const { return two_pi * j / M; }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

/// Evaluates f_n on the M-point uniform grid. Power-of-two M goes through a
/// spectral embedding + inverse FFT; any other M >= 2n+2 falls back to direct
/// summation. M < 2n+2 is rejected (grid quadratures would alias).
inline GridEvaluation eval_grid(const TrigPolynomial& p, int M, bool with_derivative = false) {
    const int n = p.n();
    require(M >= 2 * n + 2, "eval_grid: M must be >= 2n+2");

    GridEvaluation g;
    g.M = M;
    if (!detail::is_power_of_two(static_cast<std::size_t>(M))) {
        g.values.resize(M);
        for (int j = 0; j < M; ++j) g.values[j] = eval(p, g.point(j));
        if (with_derivative) {
            g.derivative_values.resize(M);
            for (int j = 0; j < M; ++j) g.derivative_values[j] = eval_derivative(p, g.point(j));
        }
        return g;
    }

    // Spectral slots: c[k] = (a_k - i b_k) / (2 sqrt(n)), c[M-k] = conj(c[k]);
    // the inverse DFT then returns the real samples f_n(t_j).
    const auto a = p.a();
    const auto b = p.b();
    const double scale = 0.5 * p.inv_sqrt_n();
    std::vector<std::complex<double>> spec(M, {0.0, 0.0});
    for (int k = 1; k <= n; ++k) {
        const std::complex<double> c(a[k - 1] * scale, -b[k - 1] * scale);
        spec[k] = c;
        spec[M - k] = std::conj(c);
    }
    std::vector<std::complex<double>> dspec;
    if (with_derivative) {
        dspec.assign(M, {0.0, 0.0});
        for (int k = 1; k <= n; ++k) {
            dspec[k] = std::complex<double>(0.0, static_cast<double>(k)) * spec[k];
            dspec[M - k] = std::conj(dspec[k]);
        }
    }

    detail::fft_pow2(spec, +1);
    g.values.resize(M);
    for (int j = 0; j < M; ++j) g.values[j] = spec[j].real();
    if (with_derivative) {
        detail::fft_pow2(dspec, +1);
        g.derivative_values.resize(M);
        for (int j = 0; j < M; ++j) g.derivative_values[j] = dspec[j].real();
    }
    return g;
}

/// Leave-one-out value S_n^k(t)/sqrt(n) = f_n(t) - R_k(t)/sqrt(n).
inline double leave_one_out_eval(const TrigPolynomial& p, int k, double t) {
    require(k >= 1 && k <= p.n(), "leave_one_out_eval: k out of range");
    const double ang = std::fmod(k * reduce_angle(t), two_pi);
    const double rk = p.a()[k - 1] * std::cos(ang) + p.b()[k - 1] * std::sin(ang);
    return eval(p, t) - rk * p.inv_sqrt_n();
}

/// Local process g_n(t) = f_n(X + t/n) on a grid of window times.
inline std::vector<double> local_eval(const TrigPolynomial& p, double X,
                                      std::span<const double> tgrid) {
    std::vector<double> out(tgrid.size());
    for (std::size_t i = 0; i < tgrid.size(); ++i)
        out[i] = eval(p, X + tgrid[i] / p.n());
    return out;
}

/// g_n'(t) = f_n'(X + t/n) / n.
inline std::vector<double> local_eval_derivative(const TrigPolynomial& p, double X,
                                                 std::span<const double> tgrid) {
    std::vector<double> out(tgrid.size());
    for (std::size_t i = 0; i < tgrid.size(); ++i)
        out[i] = eval_derivative(p, X + tgrid[i] / p.n()) / p.n();
    return out;
}

/// Closed form of E_X[g_n(t) g_n(t+tau)] = (1/2n) sum_k (a_k^2+b_k^2) cos(k*tau/n).
/// For unit-variance laws this converges to sinc(tau) as n grows.
inline double local_covariance_exact(const TrigPolynomial& p, double tau) {
    require(std::abs(tau) <= two_pi, "local_covariance_exact: |tau| must be <= 2*pi");
    const auto a = p.a();
    const auto b = p.b();
    const int n = p.n();
    double acc = 0.0, comp = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double term =
            (a[k - 1] * a[k - 1] + b[k - 1] * b[k - 1]) * std::cos(k * tau / n);
        const double s = acc + term;
        comp += (std::abs(acc) >= std::abs(term)) ? (acc - s) + term : (term - s) + acc;
        acc = s;
    }
    return (acc + comp) / (2.0 * n);
}

// --- CSV serialization: header row carries n and the model name, then one
// --- row (k, a_k, b_k) per frequency. Full round-trip decimal formatting.

inline void save_csv(const TrigPolynomial& p, const std::string& model_name, std::ostream& os) {
    os << "# n=" << p.n() << " model=" << model_name << "\n";
    os << "k,a_k,b_k\n";
    for (int k = 1; k <= p.n(); ++k)
        os << k << ',' << detail::format_double(p.a()[k - 1]) << ','
           << detail::format_double(p.b()[k - 1]) << '\n';
}

inline TrigPolynomial load_csv(std::istream& is, std::string* model_name = nullptr) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# n=", 0) != 0)
        throw config_error("polynomial CSV: missing '# n=... model=...' header");
    const auto mpos = line.find(" model=");
    if (mpos == std::string::npos) throw config_error("polynomial CSV: missing model name");
    const int n = std::stoi(line.substr(4, mpos - 4));
    if (model_name) *model_name = line.substr(mpos + 7);
    if (!std::getline(is, line) || line != "k,a_k,b_k")
        throw config_error("polynomial CSV: missing column header");

    std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        if (!std::getline(is, line)) throw config_error("polynomial CSV: truncated rows");
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        if (std::stoi(cell) != k) throw config_error("polynomial CSV: rows out of order");
        std::getline(row, cell, ',');
        a[k - 1] = std::stod(cell);
        std::getline(row, cell, ',');
        b[k - 1] = std::stod(cell);
    }
    return TrigPolynomial(std::move(a), std::move(b));
}

} // namespace rtp
