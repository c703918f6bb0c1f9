#pragma once

#include <cstdint>
#include <string>

namespace sfa {

// Fixed-point money in micro-dollars. Additions over thousands of API calls
// must not drift, so no binary floating point is ever accumulated.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }
  static Money from_dollars(double dollars);   // rounds to the nearest micro
  static Money parse(const std::string& text); // decimal dollars, e.g. "12800.50"

  constexpr std::int64_t micros() const { return micros_; }
  double dollars() const { return static_cast<double>(micros_) / 1e6; }
  std::string str() const;  // canonical decimal form, e.g. "4.347826"

  constexpr Money operator+(Money o) const { return Money(micros_ + o.micros_); }
  constexpr Money operator-(Money o) const { return Money(micros_ - o.micros_); }
  constexpr Money operator*(std::int64_t k) const { return Money(micros_ * k); }
  Money& operator+=(Money o) { micros_ += o.micros_; return *this; }
  auto operator<=>(const Money&) const = default;

 private:
  explicit constexpr Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

}  // namespace sfa
