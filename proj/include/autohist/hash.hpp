#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace autohist {

/// 64-bit FNV-1a over raw bytes.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Incremental SHA-256; digest is returned as 64 lowercase hex characters.
class Sha256
{
public:
    Sha256();
    ~Sha256();
    Sha256(Sha256 const &) = delete;
    Sha256 & operator=(Sha256 const &) = delete;

    void update(std::string_view bytes);
    /// Appends a little-endian 64-bit length prefix followed by the bytes.
    void update_length_prefixed(std::string_view bytes);
    std::string hex_digest();

private:
    void * ctx_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace autohist
