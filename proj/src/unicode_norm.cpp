#include "sfa/unicode_norm.hpp"

#include <algorithm>
#include <cstdint>

#include "sfa/utf8.hpp"

namespace sfa::unicode {

namespace {

struct CanonDecomp {
  uint32_t cp;
  uint32_t first;
  uint32_t second;  // 0 for singleton decompositions
};

struct CombiningClass {
  uint32_t cp;
  uint16_t ccc;
};

struct CompPair {
  uint32_t first;
  uint32_t second;
  uint32_t composed;
};

#include "unicode_data.inc"

constexpr char32_t kHangulSBase = 0xAC00;
constexpr char32_t kHangulLBase = 0x1100;
constexpr char32_t kHangulVBase = 0x1161;
constexpr char32_t kHangulTBase = 0x11A7;
constexpr int kHangulLCount = 19;
constexpr int kHangulVCount = 21;
constexpr int kHangulTCount = 28;
constexpr int kHangulNCount = kHangulVCount * kHangulTCount;
constexpr int kHangulSCount = kHangulLCount * kHangulNCount;

const CanonDecomp* find_decomp(char32_t cp) {
  const auto* end = kCanonDecomp + std::size(kCanonDecomp);
  const auto* it = std::lower_bound(
      kCanonDecomp, end, static_cast<uint32_t>(cp),
      [](const CanonDecomp& d, uint32_t c) { return d.cp < c; });
  return (it != end && it->cp == cp) ? it : nullptr;
}

void decompose_into(char32_t cp, std::vector<char32_t>& out) {
  if (cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount) {
    const int idx = static_cast<int>(cp - kHangulSBase);
    out.push_back(kHangulLBase + idx / kHangulNCount);
    out.push_back(kHangulVBase + (idx % kHangulNCount) / kHangulTCount);
    if (idx % kHangulTCount != 0) out.push_back(kHangulTBase + idx % kHangulTCount);
    return;
  }
  if (const CanonDecomp* d = find_decomp(cp)) {
    decompose_into(d->first, out);
    if (d->second != 0) decompose_into(d->second, out);
    return;
  }
  out.push_back(cp);
}

// Primary composite of (a, b), or 0 when the pair does not compose.
char32_t compose_pair(char32_t a, char32_t b) {
  // Hangul L+V and LV+T
  if (a >= kHangulLBase && a < kHangulLBase + kHangulLCount && b >= kHangulVBase &&
      b < kHangulVBase + kHangulVCount) {
    return kHangulSBase + ((a - kHangulLBase) * kHangulVCount + (b - kHangulVBase)) *
                              kHangulTCount;
  }
  if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount &&
      (a - kHangulSBase) % kHangulTCount == 0 && b > kHangulTBase &&
      b < kHangulTBase + kHangulTCount) {
    return a + (b - kHangulTBase);
  }
  const auto* end = kCompPair + std::size(kCompPair);
  const auto* it = std::lower_bound(
      kCompPair, end, std::pair<uint32_t, uint32_t>{a, b},
      [](const CompPair& p, const std::pair<uint32_t, uint32_t>& key) {
        return p.first != key.first ? p.first < key.first : p.second < key.second;
      });
  if (it != end && it->first == a && it->second == b) return it->composed;
  return 0;
}

}  // namespace

int combining_class(char32_t cp) {
  const auto* end = kCombiningClass + std::size(kCombiningClass);
  const auto* it = std::lower_bound(
      kCombiningClass, end, static_cast<uint32_t>(cp),
      [](const CombiningClass& c, uint32_t v) { return c.cp < v; });
  return (it != end && it->cp == cp) ? it->ccc : 0;
}

std::vector<char32_t> nfd(const std::vector<char32_t>& codepoints) {
  std::vector<char32_t> out;
  out.reserve(codepoints.size());
  for (char32_t cp : codepoints) decompose_into(cp, out);
  // Canonical ordering: stable sort of each nonzero-ccc run.
  for (std::size_t i = 1; i < out.size(); ++i) {
    const int ccc = combining_class(out[i]);
    if (ccc == 0) continue;
    std::size_t j = i;
    while (j > 0) {
      const int prev = combining_class(out[j - 1]);
      if (prev == 0 || prev <= ccc) break;
      std::swap(out[j - 1], out[j]);
      --j;
    }
  }
  return out;
}

std::vector<char32_t> nfc(const std::vector<char32_t>& codepoints) {
  std::vector<char32_t> d = nfd(codepoints);
  if (d.empty()) return d;

  // Standard canonical composition over the decomposed sequence. A char is
  // blocked from the last starter when something with ccc == 0 or
  // ccc >= its own sits in between (last_ccc == -1 means nothing does).
  std::vector<char32_t> out;
  out.reserve(d.size());
  std::ptrdiff_t last_starter = -1;
  int last_ccc = -1;
  for (char32_t cp : d) {
    const int ccc = combining_class(cp);
    const bool blocked = last_ccc != -1 && last_ccc >= ccc;
    if (last_starter >= 0 && !blocked) {
      if (char32_t comp = compose_pair(out[last_starter], cp); comp != 0) {
        out[last_starter] = comp;
        continue;
      }
    }
    out.push_back(cp);
    if (ccc == 0) {
      last_starter = static_cast<std::ptrdiff_t>(out.size()) - 1;
      last_ccc = -1;
    } else {
      last_ccc = ccc;
    }
  }
  return out;
}

std::string nfc(std::string_view text) {
  return utf8::encode(nfc(utf8::decode(text)));
}

}  // namespace sfa::unicode
