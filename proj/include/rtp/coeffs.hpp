#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "rtp/errors.hpp"
#include "rtp/rng.hpp"

namespace rtp {

/// Exact moments of a coefficient law. All built-in laws are centered with
/// unit variance; the absolute moments feed the Stein constant.
struct MomentSet {
    double mean = 0.0;
    double variance = 1.0;
    double abs_m1 = 0.0; // E|a|
    double m3 = 0.0;     // E[a^3]
    double abs_m3 = 0.0; // E|a|^3
    double m4 = 0.0;     // E[a^4]

    bool consistent() const {
        return variance > 0.0 && abs_m3 >= std::abs(m3) &&
               m4 >= variance * variance && abs_m1 <= std::sqrt(variance);
    }
};

/// A named coefficient law together with its analytically known moments.
/// Moments are stored exactly (not estimated) so the Stein constant is exact.
struct CoefficientModel {
    std::string name;
    bool symmetric = true;
    MomentSet moments;

    double sample(RngStream& stream) const {
        switch (kind_) {
        case Kind::rademacher: return stream.rademacher();
        case Kind::gaussian: return stream.normal();
        case Kind::uniform: return stream.uniform(-half_width_, half_width_);
        }
        return 0.0; // unreachable
    }

    static CoefficientModel rademacher() {
        CoefficientModel m;
        m.name = "rademacher";
        m.kind_ = Kind::rademacher;
        m.moments = {0.0, 1.0, 1.0, 0.0, 1.0, 1.0};
        return m;
    }

    static CoefficientModel gaussian() {
        CoefficientModel m;
        m.name = "gaussian";
        m.kind_ = Kind::gaussian;
        const double e_abs = std::sqrt(2.0 / std::numbers::pi);
        m.moments = {0.0, 1.0, e_abs, 0.0, 2.0 * e_abs, 3.0};
        return m;
    }

    /// Uniform on (-sqrt(3), sqrt(3)): unit variance, E|a| = sqrt(3)/2,
    /// E|a|^3 = 3*sqrt(3)/4, E[a^4] = 9/5.
    static CoefficientModel uniform() {
        CoefficientModel m;
        m.name = "uniform";
        m.kind_ = Kind::uniform;
        const double s3 = std::sqrt(3.0);
        m.moments = {0.0, 1.0, s3 / 2.0, 0.0, 3.0 * s3 / 4.0, 9.0 / 5.0};
        return m;
    }

    static const std::vector<CoefficientModel>& builtins() {
        static const std::vector<CoefficientModel> all = {rademacher(), gaussian(), uniform()};
        return all;
    }

    static CoefficientModel by_name(const std::string& name) {
        for (const auto& m : builtins())
            if (m.name == name) return m;
        throw config_error("unknown coefficient model '" + name + "'");
    }

private:
    enum class Kind { rademacher, gaussian, uniform };
    Kind kind_ = Kind::gaussian;
    static constexpr double half_width_ = 1.7320508075688772; // sqrt(3)
};

/// The explicit constant bounding the expected C^3 distance of f_n(X) to a
/// standard Gaussian by C(a1)/sqrt(n):
///   C(a1) = 81*sqrt(13 + |E a^3|) + 8*sqrt(E a^4) + sqrt(2) + 8*E|a|^3 + 24*E|a|.
inline double stein_constant(const MomentSet& m) {
    for (double v : {m.mean, m.variance, m.abs_m1, m.m3, m.abs_m3, m.m4})
        if (!std::isfinite(v)) throw std::domain_error("stein_constant: non-finite moment");
    return 81.0 * std::sqrt(13.0 + std::abs(m.m3)) + 8.0 * std::sqrt(m.m4) +
           std::numbers::sqrt2 + 8.0 * m.abs_m3 + 24.0 * m.abs_m1;
}

/// Draws the 2n i.i.d. coefficients of one polynomial: the n cosine
/// coefficients first, then the n sine coefficients.
inline void sample_pair_sequence(const CoefficientModel& model, int n, RngStream& stream,
                                 std::vector<double>& a, std::vector<double>& b) {
    require(n >= 1, "sample_pair_sequence: n must be >= 1");
    a.resize(static_cast<std::size_t>(n));
    b.resize(static_cast<std::size_t>(n));
    for (auto& v : a) v = model.sample(stream);
    for (auto& v : b) v = model.sample(stream);
}

} // namespace rtp
