#include "sfa/money.hpp"

#include <cmath>
#include <cstdlib>

#include "sfa/errors.hpp"

namespace sfa {

Money Money::from_dollars(double dollars) {
  return Money(static_cast<std::int64_t>(std::llround(dollars * 1e6)));
}

Money Money::parse(const std::string& text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    neg = text[i] == '-';
    ++i;
  }
  std::int64_t whole = 0, frac = 0;
  int frac_digits = 0;
  bool any = false;
  for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
    whole = whole * 10 + (text[i] - '0');
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
      if (frac_digits < 6) {
        frac = frac * 10 + (text[i] - '0');
        ++frac_digits;
      }
      any = true;
    }
  }
  if (!any || i != text.size())
    throw ParseError("bad money literal: '" + text + "'");
  while (frac_digits < 6) {
    frac *= 10;
    ++frac_digits;
  }
  std::int64_t micros = whole * 1000000 + frac;
  return Money(neg ? -micros : micros);
}

std::string Money::str() const {
  std::int64_t m = micros_;
  std::string sign;
  if (m < 0) {
    sign = "-";
    m = -m;
  }
  std::string out = sign + std::to_string(m / 1000000);
  std::int64_t frac = m % 1000000;
  if (frac != 0) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(frac));
    std::string f(buf);
    while (!f.empty() && f.back() == '0') f.pop_back();
    out += "." + f;
  }
  return out;
}

}  // namespace sfa
