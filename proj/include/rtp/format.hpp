#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace rtp::detail {

/// Shortest decimal string that round-trips to the same double. Locale-free
/// and byte-stable, which is what the CSV/JSON determinism contract needs.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_u64(std::uint64_t v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace rtp::detail
