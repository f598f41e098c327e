#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace kds {

// Canonical JSON: object keys sorted, no insignificant whitespace. Two
// semantically equal requests must serialize to identical bytes so their
// cache keys collide on purpose.
inline std::string canonical_json(const nlohmann::json& j) {
    // nlohmann::json stores objects as std::map, so keys are already sorted;
    // compact dump strips whitespace.
    return j.dump();
}

// Cache key per the store contract: sha256(stage || backend_id || canonical
// request), rendered as 64 lowercase hex chars.
std::string make_cache_key(std::string_view stage, std::string_view backend_id,
                           const nlohmann::json& request);

// Collapses runs of whitespace to a single space and trims both ends.
std::string normalize_whitespace(std::string_view text);

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace kds
