#pragma once

#include <string>
#include <string_view>

namespace sarc::utf8 {

// Invalid sequences decode to U+FFFD, one per offending byte.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

bool is_whitespace(char32_t cp);
bool is_devanagari(char32_t cp);

// Trim ASCII and Unicode whitespace from both ends.
std::string trim(std::string_view text);

}  // namespace sarc::utf8
