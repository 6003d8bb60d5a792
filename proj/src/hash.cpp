#include "autohist/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace autohist {

namespace {

EVP_MD_CTX * as_ctx(void * p) { return static_cast<EVP_MD_CTX *>(p); }

}  // namespace

Sha256::Sha256() : ctx_(EVP_MD_CTX_new())
{
    if (!ctx_ || EVP_DigestInit_ex(as_ctx(ctx_), EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(as_ctx(ctx_));
        throw std::runtime_error("sha256: digest initialization failed");
    }
}

Sha256::~Sha256() { EVP_MD_CTX_free(as_ctx(ctx_)); }

void Sha256::update(std::string_view bytes)
{
    if (EVP_DigestUpdate(as_ctx(ctx_), bytes.data(), bytes.size()) != 1) {
        throw std::runtime_error("sha256: update failed");
    }
}

void Sha256::update_length_prefixed(std::string_view bytes)
{
    std::array<char, 8> prefix{};
    auto n = static_cast<std::uint64_t>(bytes.size());
    for (auto & b : prefix) {
        b = static_cast<char>(n & 0xff);
        n >>= 8;
    }
    update(std::string_view(prefix.data(), prefix.size()));
    update(bytes);
}

std::string Sha256::hex_digest()
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(as_ctx(ctx_), md.data(), &len) != 1) {
        throw std::runtime_error("sha256: finalize failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xf]);
    }
    return out;
}

std::string sha256_hex(std::string_view bytes)
{
    Sha256 h;
    h.update(bytes);
    return h.hex_digest();
}

}  // namespace autohist
