#pragma once

#include <json.hpp>

#include "rtp/zeros.hpp"

namespace rtp {

inline nlohmann::json to_json(const ZeroReport& rep) {
    nlohmann::json j;
    j["interval"] = {rep.interval.lo, rep.interval.hi()};
    j["count"] = rep.count;
    j["roots"] = rep.roots;
    j["tolerance"] = rep.tolerance;
    nlohmann::json flags = nlohmann::json::array();
    for (const auto& [a, b] : rep.suspicious_intervals) flags.push_back({a, b});
    j["suspicious_intervals"] = flags;
    j["method"] = (rep.method == ZeroReport::Method::grid) ? "grid" : "companion";
    return j;
}

} // namespace rtp
