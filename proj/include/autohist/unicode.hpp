#pragma once

#include <string>
#include <string_view>

namespace autohist::text {

/// NFC-normalizes and lowercases UTF-8 text. Invalid sequences are
/// replaced with U+FFFD.
std::string normalize(std::string_view utf8);

/// Number of Unicode code points in valid UTF-8.
std::size_t code_point_length(std::string_view utf8);

std::string_view trim(std::string_view s);
bool is_blank(std::string_view s);

}  // namespace autohist::text
