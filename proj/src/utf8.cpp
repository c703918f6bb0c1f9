#include "sfa/utf8.hpp"

#include "sfa/errors.hpp"

namespace sfa::utf8 {

namespace {

// Decodes one scalar value starting at `i`; advances `i` past it.
char32_t decode_one(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    throw ParseError("invalid UTF-8 lead byte at offset " + std::to_string(i));
  }
  if (i + len > s.size())
    throw ParseError("truncated UTF-8 sequence at offset " + std::to_string(i));
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80)
      throw ParseError("invalid UTF-8 continuation byte at offset " +
                       std::to_string(i + k));
    cp = (cp << 6) | (b & 0x3F);
  }
  static const char32_t kMinByLen[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMinByLen[len])
    throw ParseError("overlong UTF-8 sequence at offset " + std::to_string(i));
  if (cp >= 0xD800 && cp <= 0xDFFF)
    throw ParseError("UTF-8 encoded surrogate at offset " + std::to_string(i));
  if (cp > 0x10FFFF)
    throw ParseError("UTF-8 value out of range at offset " + std::to_string(i));
  i += len;
  return cp;
}

}  // namespace

std::vector<char32_t> decode(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) out.push_back(decode_one(text, i));
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(const std::vector<char32_t>& codepoints) {
  std::string out;
  out.reserve(codepoints.size());
  for (char32_t cp : codepoints) append(out, cp);
  return out;
}

std::size_t length(std::string_view text) {
  std::size_t n = 0, i = 0;
  while (i < text.size()) {
    decode_one(text, i);
    ++n;
  }
  return n;
}

std::string slice(std::string_view text, std::size_t start, std::size_t end) {
  if (start > end) throw Error("utf8::slice: start > end");
  std::size_t i = 0, n = 0;
  std::size_t byte_start = text.size();
  while (i < text.size() && n < end) {
    if (n == start) byte_start = i;
    decode_one(text, i);
    ++n;
  }
  if (n <= start) return {};
  return std::string(text.substr(byte_start, i - byte_start));
}

bool is_valid(std::string_view text) {
  try {
    std::size_t i = 0;
    while (i < text.size()) decode_one(text, i);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

}  // namespace sfa::utf8
