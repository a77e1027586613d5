// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>

#include "revlin/error.hpp"

namespace revlin {

// GMP keeps mpq_class results canonical (gcd(num, den) = 1, den > 0, zero as
// 0/1) after every arithmetic operation; values built from text go through
// canonicalize() in parse_rational.
using Rational = mpq_class;

inline bool is_canonical(const Rational& q) {
  if (sgn(q.get_den()) <= 0) return false;
  if (sgn(q.get_num()) == 0) return q.get_den() == 1;
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return g == 1;
}

/// Largest of the numerator and denominator bit lengths.
inline std::size_t bit_width(const Rational& q) {
  const std::size_t num = mpz_sizeinbase(q.get_num_mpz_t(), 2);
  const std::size_t den = mpz_sizeinbase(q.get_den_mpz_t(), 2);
  return std::max(num, den);
}

namespace detail {

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

}  // namespace detail

/// Accepts "7", "-7/3", "1.25" (exactly 5/4), with an optional leading sign.
inline Rational parse_rational(std::string_view text) {
  const std::string original(text);
  auto fail = [&]() -> Rational {
    throw Error(Errc::kParse, "not a rational number: '" + original + "'");
  };
  if (text.empty()) return fail();

  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  Rational value;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = text.substr(0, slash);
    const auto den = text.substr(slash + 1);
    if (!detail::all_digits(num) || !detail::all_digits(den)) return fail();
    mpz_class d(std::string(den), 10);
    if (d == 0) throw Error(Errc::kParse, "zero denominator in '" + original + "'");
    value = Rational(mpz_class(std::string(num), 10), d);
  } else if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const auto whole = text.substr(0, dot);
    const auto frac = text.substr(dot + 1);
    if (whole.empty() && frac.empty()) return fail();
    if ((!whole.empty() && !detail::all_digits(whole)) ||
        (!frac.empty() && !detail::all_digits(frac))) {
      return fail();
    }
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    const std::string digits = std::string(whole) + std::string(frac);
    value = Rational(mpz_class(digits.empty() ? "0" : digits, 10), scale);
  } else {
    if (!detail::all_digits(text)) return fail();
    value = Rational(mpz_class(std::string(text), 10));
  }
  value.canonicalize();
  if (negative) value = -value;
  return value;
}

/// Canonical "p/q" form, with "/q" omitted when q = 1.
inline std::string to_string(const Rational& q) { return q.get_str(10); }

/// Round-half-away-from-zero decimal rendering; lossy, for human display only.
inline std::string to_decimal(const Rational& q, int digits) {
  digits = std::max(digits, 0);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  mpz_class num = abs(q.get_num()) * scale * 2 + q.get_den();
  mpz_class den = q.get_den() * 2;
  mpz_class scaled;
  mpz_fdiv_q(scaled.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());

  std::string body = scaled.get_str(10);
  if (digits > 0) {
    if (body.size() <= static_cast<std::size_t>(digits)) {
      body.insert(0, static_cast<std::size_t>(digits) + 1 - body.size(), '0');
    }
    body.insert(body.size() - static_cast<std::size_t>(digits), ".");
  }
  const bool is_zero = scaled == 0;
  return (sgn(q) < 0 && !is_zero ? "-" : "") + body;
}

}  // namespace revlin
