#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sfa::unicode {

// Canonical composition (Unicode NFC), including algorithmic Hangul
// handling. Tables are generated from the UCD by scripts/gen_unicode_data.py.
std::string nfc(std::string_view text);
std::vector<char32_t> nfc(const std::vector<char32_t>& codepoints);

// Canonical decomposition (NFD); exposed mainly for tests.
std::vector<char32_t> nfd(const std::vector<char32_t>& codepoints);

int combining_class(char32_t cp);

}  // namespace sfa::unicode
