#pragma once

#include "mathieu/errors.hpp"

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mathieu {

// Exact rational scalar. GMP keeps every value in lowest terms with a
// positive denominator.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

inline bool is_zero(const Rational& r) { return r.is_zero(); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Integer numerator_of(const Rational& r) { return boost::multiprecision::numerator(r); }
inline Integer denominator_of(const Rational& r) { return boost::multiprecision::denominator(r); }

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw DomainError("zero denominator");
  return Rational(Integer(num), Integer(den));
}

/// Parses "p/q", an integer, or a decimal literal with optional exponent
/// ("0.9", "-1.25e-3") into an exact rational. No floating point is involved.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { throw DomainError("not a rational literal: '" + std::string(text) + "'"); };
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty()) fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (is_zero(den)) fail();
    return num / den;
  }

  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (digits.empty()) fail();
  long exponent = 0;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') fail();
    std::string exp_text(text.substr(i + 1));
    if (exp_text.empty()) fail();
    std::size_t used = 0;
    try {
      exponent = std::stol(exp_text, &used);
    } catch (const std::exception&) {
      fail();
    }
    if (used != exp_text.size()) fail();
  }
  exponent -= frac_digits;
  // leading zeros would be read as octal
  const auto nz = digits.find_first_not_of('0');
  Integer value(nz == std::string::npos ? std::string("0") : digits.substr(nz));
  Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
  Rational result = exponent < 0 ? Rational(value, scale) : Rational(value * scale);
  return negative ? Rational(-result) : result;
}

inline std::string to_string(const Rational& r) { return r.str(); }

}  // namespace mathieu
