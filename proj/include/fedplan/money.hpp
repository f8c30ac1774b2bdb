#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "fedplan/errors.hpp"

namespace fedplan {

namespace detail {

// Parses "[-]digits[.digits]" into an integer scaled by 10^scale. Rejects
// more fractional digits than `scale` instead of rounding.
inline __int128 parse_scaled_decimal(std::string_view text, int scale, const char* what) {
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError(std::string(what) + " '" + std::string(text) + "': " + why);
  };
  if (text.empty()) throw fail("empty decimal");
  std::size_t pos = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  __int128 value = 0;
  int frac_digits = -1;
  bool any_digit = false;
  constexpr __int128 kLimit = static_cast<__int128>(1) << 120;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c == '.') {
      if (frac_digits >= 0) throw fail("second decimal point");
      frac_digits = 0;
      continue;
    }
    if (c < '0' || c > '9') throw fail("unexpected character");
    any_digit = true;
    if (frac_digits >= 0 && ++frac_digits > scale) throw fail("more than " + std::to_string(scale) + " fractional digits");
    value = value * 10 + (c - '0');
    if (value > kLimit) throw fail("out of range");
  }
  if (!any_digit) throw fail("no digits");
  for (int i = frac_digits < 0 ? 0 : frac_digits; i < scale; ++i) {
    value *= 10;
    if (value > kLimit) throw fail("out of range");
  }
  return negative ? -value : value;
}

inline std::string format_scaled_decimal(__int128 value, int scale, int min_frac) {
  bool negative = value < 0;
  unsigned __int128 mag = negative ? static_cast<unsigned __int128>(-value) : static_cast<unsigned __int128>(value);
  std::string digits;
  do {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(mag % 10)));
    mag /= 10;
  } while (mag != 0);
  if (digits.size() <= static_cast<std::size_t>(scale)) digits.insert(0, scale + 1 - digits.size(), '0');
  std::string whole = digits.substr(0, digits.size() - scale);
  std::string frac = digits.substr(digits.size() - scale);
  while (frac.size() > static_cast<std::size_t>(min_frac) && frac.back() == '0') frac.pop_back();
  std::string out = negative ? "-" : "";
  out += whole;
  if (!frac.empty()) out += "." + frac;
  return out;
}

}  // namespace detail

/// Exact money amount, stored as an integer count of 1e-15 units so that
/// every rate x volume product is representable without rounding.
class Money {
 public:
  static constexpr int kScale = 15;

  constexpr Money() = default;

  static constexpr Money from_units(__int128 units) {
    Money m;
    m.units_ = units;
    return m;
  }
  static Money from_whole(std::int64_t whole) { return from_units(static_cast<__int128>(whole) * unit_per_whole()); }
  static Money parse(std::string_view text) { return from_units(detail::parse_scaled_decimal(text, kScale, "money")); }

  constexpr __int128 units() const { return units_; }
  double to_double() const { return static_cast<double>(units_) / 1e15; }

  /// Exact decimal text, trailing zeros trimmed down to two fractional digits.
  std::string to_string() const { return detail::format_scaled_decimal(units_, kScale, 2); }

  Money& operator+=(Money o) {
    units_ += o.units_;
    return *this;
  }
  Money& operator-=(Money o) {
    units_ -= o.units_;
    return *this;
  }
  friend Money operator+(Money a, Money b) { return a += b; }
  friend Money operator-(Money a, Money b) { return a -= b; }
  friend Money operator*(Money a, std::int64_t k) { return from_units(a.units_ * k); }

  friend bool operator==(Money a, Money b) { return a.units_ == b.units_; }
  friend bool operator!=(Money a, Money b) { return a.units_ != b.units_; }
  friend bool operator<(Money a, Money b) { return a.units_ < b.units_; }
  friend bool operator<=(Money a, Money b) { return a.units_ <= b.units_; }
  friend bool operator>(Money a, Money b) { return a.units_ > b.units_; }
  friend bool operator>=(Money a, Money b) { return a.units_ >= b.units_; }

 private:
  static constexpr __int128 unit_per_whole() { return static_cast<__int128>(1'000'000'000'000'000LL); }
  __int128 units_ = 0;
};

/// Price per GB (10^9 bytes), exact to 1e-6. Multiplying by a byte count
/// yields an exact Money because 1e-6 / 1e9 = 1e-15.
class Rate {
 public:
  static constexpr int kScale = 6;

  constexpr Rate() = default;

  static constexpr Rate from_micros(std::int64_t micros_per_gb) {
    Rate r;
    r.micros_ = micros_per_gb;
    return r;
  }
  static Rate parse(std::string_view text) {
    __int128 v = detail::parse_scaled_decimal(text, kScale, "rate");
    if (v < 0) throw ValidationError("rate '" + std::string(text) + "' is negative");
    if (v > static_cast<__int128>(INT64_MAX)) throw ValidationError("rate '" + std::string(text) + "' out of range");
    return from_micros(static_cast<std::int64_t>(v));
  }

  constexpr std::int64_t micros_per_gb() const { return micros_; }
  Money times_bytes(std::uint64_t bytes) const { return Money::from_units(static_cast<__int128>(micros_) * bytes); }
  Rate scaled(std::int64_t factor) const { return from_micros(micros_ * factor); }
  std::string to_string() const { return detail::format_scaled_decimal(micros_, kScale, 2); }

  friend bool operator==(Rate a, Rate b) { return a.micros_ == b.micros_; }

 private:
  std::int64_t micros_ = 0;
};

}  // namespace fedplan
