#pragma once

#include <cmath>
#include <numbers>

namespace rtp {

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Phi(x) through the complementary error function; absolute error below
/// 1e-14 over the whole line, which the Kolmogorov sup needs in the tails.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

} // namespace rtp
