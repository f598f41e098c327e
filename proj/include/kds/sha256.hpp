#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace kds {

// Incremental SHA-256 (FIPS 180-4). Self-contained so the pipeline has no
// crypto library dependency; content addressing only needs a stable,
// collision-resistant digest.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }

    // Finalizes and returns the 32-byte digest. The object must be reset()
    // before it can be reused.
    std::array<std::uint8_t, 32> digest();

    static std::string hex_digest(std::string_view data);

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_{};
    std::array<std::uint8_t, 64> buffer_{};
    std::uint64_t total_len_ = 0;
    std::size_t buffer_len_ = 0;
};

std::string to_hex(const std::uint8_t* data, std::size_t len);

} // namespace kds
