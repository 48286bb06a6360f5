#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace dualpass {

/// Streaming SHA-256 (FIPS 180-4).
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::array<std::uint8_t, 32> finish();

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_{};
    std::array<std::uint8_t, 64> buffer_{};
    std::uint64_t total_len_ = 0;
    std::size_t buffer_len_ = 0;
};

std::string sha256_hex(std::string_view data);

std::string to_hex(const std::uint8_t* data, std::size_t len);
std::string to_hex(std::string_view bytes);

/// Overwrites the buffer before releasing it; used for regenerated
/// authentication-password plaintext.
void secure_wipe(std::string& s);

} // namespace dualpass
