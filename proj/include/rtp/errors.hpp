#pragma once

#include <stdexcept>
#include <string>

namespace rtp {

/// Bad configuration: unknown model names, malformed config files, invalid
/// experiment parameters. Maps to CLI exit code 1.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at run time: degenerate inputs, factorization or
/// eigenvalue breakdown. Maps to CLI exit code 2.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace rtp
