#include "kds/canonical.hpp"

#include <cctype>

#include "kds/sha256.hpp"

namespace kds {

std::string make_cache_key(std::string_view stage, std::string_view backend_id,
                           const nlohmann::json& request) {
    Sha256 h;
    h.update(stage);
    h.update("\x1f");
    h.update(backend_id);
    h.update("\x1f");
    h.update(canonical_json(request));
    const auto d = h.digest();
    return to_hex(d.data(), d.size());
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_ws = true; // leading whitespace is dropped
    for (const char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_ws) out.push_back(' ');
            in_ws = true;
        } else {
            out.push_back(c);
            in_ws = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

} // namespace kds
