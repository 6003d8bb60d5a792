#include "autohist/unicode.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace autohist::text {

std::string normalize(std::string_view utf8)
{
    if (utf8.empty()) {
        return {};
    }
    UErrorCode status = U_ZERO_ERROR;
    icu::Normalizer2 const * nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) {
        throw std::runtime_error("ICU NFC normalizer unavailable");
    }
    auto source = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    icu::UnicodeString normalized = nfc->normalize(source, status);
    if (U_FAILURE(status)) {
        throw std::runtime_error("ICU normalization failed");
    }
    // Lowercasing can produce non-NFC sequences for a few characters.
    normalized.toLower(icu::Locale::getRoot());
    normalized = nfc->normalize(normalized, status);
    if (U_FAILURE(status)) {
        throw std::runtime_error("ICU normalization failed");
    }
    std::string out;
    normalized.toUTF8String(out);
    return out;
}

std::size_t code_point_length(std::string_view utf8)
{
    std::size_t count = 0;
    for (unsigned char c : utf8) {
        if ((c & 0xC0) != 0x80) {
            ++count;
        }
    }
    return count;
}

std::string_view trim(std::string_view s)
{
    constexpr std::string_view kSpace = " \t\n\r\f\v";
    auto const first = s.find_first_not_of(kSpace);
    if (first == std::string_view::npos) {
        return {};
    }
    auto const last = s.find_last_not_of(kSpace);
    return s.substr(first, last - first + 1);
}

bool is_blank(std::string_view s)
{
    if (trim(s).empty()) {
        return true;
    }
    // Non-ASCII whitespace (NBSP, ideographic space, ...) also counts.
    std::int32_t i = 0;
    auto const n = static_cast<std::int32_t>(s.size());
    auto const * bytes = reinterpret_cast<std::uint8_t const *>(s.data());
    while (i < n) {
        UChar32 c;
        U8_NEXT(bytes, i, n, c);
        if (c < 0 || !u_isUWhiteSpace(c)) {
            return false;
        }
    }
    return true;
}

}  // namespace autohist::text
