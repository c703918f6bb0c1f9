#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sfa::utf8 {

// Decodes UTF-8 into Unicode scalar values. Throws sfa::ParseError on
// malformed sequences (overlong forms, surrogates, truncation).
std::vector<char32_t> decode(std::string_view text);

std::string encode(const std::vector<char32_t>& codepoints);
void append(std::string& out, char32_t cp);

// Number of Unicode scalar values in `text`. All character offsets in
// this library count scalar values, never bytes.
std::size_t length(std::string_view text);

// Substring by scalar-value offsets [start, end). Clamps to the end of
// the text; throws if start > end.
std::string slice(std::string_view text, std::size_t start, std::size_t end);

bool is_valid(std::string_view text);

}  // namespace sfa::utf8
