// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace peb {

/// Exact probability arithmetic.
using Rational = mpq_class;

/// num/den in canonical form; den != 0. The two-argument mpq_class
/// constructor does not reduce, and GMP arithmetic expects reduced operands.
inline Rational ratio(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// Parses `7`, `0.7`, `.25` or `1/3` exactly; no binary floating point.
std::optional<Rational> parse_rational(std::string_view text);

/// `p/q`, or `p` when the denominator is 1.
std::string to_string(const Rational& q);

/// Rounded to `places` fractional digits (half away from zero).
std::string to_decimal(const Rational& q, int places = 6);

}  // namespace peb
