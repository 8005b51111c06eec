#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "rtp/errors.hpp"

namespace rtp::detail {

inline bool is_power_of_two(std::size_t m) { return m != 0 && (m & (m - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t m) {
    std::size_t p = 1;
    while (p < m) p <<= 1;
    return p;
}

/// In-place iterative radix-2 transform, sign = +1 for the inverse-DFT
/// convention sum_m c[m] * exp(+i*2*pi*m*j/M) (no 1/M factor applied).
/// Deterministic: no planner, no threading.
inline void fft_pow2(std::vector<std::complex<double>>& data, int sign) {
    const std::size_t m = data.size();
    require(is_power_of_two(m), "fft_pow2: size must be a power of two");

    for (std::size_t i = 1, j = 0; i < m; ++i) {
        std::size_t bit = m >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= m; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < m; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = data[i + j];
                const std::complex<double> v = data[i + j + len / 2] * w;
                data[i + j] = u + v;
                data[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

} // namespace rtp::detail
