#ifndef CAFM_RATIONAL_HPP
#define CAFM_RATIONAL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

// Exact mixed rational/integer equality, preferred over Boost's templates
// under C++20 reversed-operand lookup.
namespace boost {
inline constexpr bool operator==(const rational<std::int64_t>& a, int b) {
  return a.denominator() == 1 && a.numerator() == b;
}
inline constexpr bool operator==(int b, const rational<std::int64_t>& a) { return a == b; }
inline constexpr bool operator==(const rational<std::int64_t>& a, std::int64_t b) {
  return a.denominator() == 1 && a.numerator() == b;
}
inline constexpr bool operator==(std::int64_t b, const rational<std::int64_t>& a) { return a == b; }
}  // namespace boost

namespace cafm {

/// Exact rational used for every measurable quantity (attributes, costs, QoC).
using Rational = boost::rational<std::int64_t>;

namespace detail {

inline bool accumulate_digits(std::string_view digits, std::int64_t& value, int& count) {
  for (char c : digits) {
    if (c < '0' || c > '9') return false;
    if (++count > 18) return false;
    value = value * 10 + (c - '0');
  }
  return true;
}

inline std::int64_t pow10(int n) {
  std::int64_t p = 1;
  while (n-- > 0) p *= 10;
  return p;
}

}  // namespace detail

/// Parses `[-]digits[.digits]` or `[-]digits/digits`. At most 18 significant
/// digits; anything else yields nullopt.
inline std::optional<Rational> parse_rational(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (text.empty()) return std::nullopt;

  std::int64_t num = 0;
  std::int64_t den = 1;
  int count = 0;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto lhs = text.substr(0, slash);
    auto rhs = text.substr(slash + 1);
    if (lhs.empty() || rhs.empty()) return std::nullopt;
    if (!detail::accumulate_digits(lhs, num, count)) return std::nullopt;
    int den_count = 0;
    den = 0;
    if (!detail::accumulate_digits(rhs, den, den_count) || den == 0) return std::nullopt;
  } else {
    auto dot = text.find('.');
    auto whole = text.substr(0, dot);
    std::string_view frac;
    if (dot != std::string_view::npos) {
      frac = text.substr(dot + 1);
      if (frac.empty()) return std::nullopt;
    }
    if (whole.empty()) return std::nullopt;
    if (!detail::accumulate_digits(whole, num, count)) return std::nullopt;
    if (!detail::accumulate_digits(frac, num, count)) return std::nullopt;
    den = detail::pow10(static_cast<int>(frac.size()));
  }
  return Rational(negative ? -num : num, den);
}

/// Canonical text: integers as-is, terminating fractions as minimal decimals,
/// everything else as `n/d`. parse_rational(format_rational(r)) == r.
inline std::string format_rational(const Rational& r) {
  const std::int64_t num = r.numerator();
  const std::int64_t den = r.denominator();
  if (den == 1) return std::to_string(num);

  std::int64_t rest = den;
  int twos = 0;
  int fives = 0;
  while (rest % 2 == 0) { rest /= 2; ++twos; }
  while (rest % 5 == 0) { rest /= 5; ++fives; }
  const int places = twos > fives ? twos : fives;
  if (rest != 1 || places > 18) return std::to_string(num) + "/" + std::to_string(den);

  const std::int64_t scale = detail::pow10(places) / den;
  const std::int64_t mag = num < 0 ? -num : num;
  if (mag > INT64_MAX / scale) return std::to_string(num) + "/" + std::to_string(den);
  std::string digits = std::to_string(mag * scale);
  if (digits.size() <= static_cast<std::size_t>(places)) {
    digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
  }
  digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  return (num < 0 ? "-" : "") + digits;
}

}  // namespace cafm

#endif  // CAFM_RATIONAL_HPP
