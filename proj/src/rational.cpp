// SPDX-License-Identifier: Apache-2.0

#include "peb/rational.hpp"

#include <cctype>

namespace peb {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return std::nullopt;
    mpz_class d{std::string(den), 10};
    if (d == 0) return std::nullopt;
    Rational q{mpz_class{std::string(num), 10}, d};
    q.canonicalize();
    return q;
  }
  auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  if (!whole.empty() && !all_digits(whole)) return std::nullopt;
  if (dot != std::string_view::npos && !all_digits(frac)) return std::nullopt;
  std::string digits = std::string(whole) + std::string(frac);
  mpz_class den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  Rational q{mpz_class{digits, 10}, den};
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string to_decimal(const Rational& q, int places) {
  mpz_class scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  mpz_class num = abs(q.get_num()) * scale * 2 + q.get_den();
  mpz_class den = q.get_den() * 2;
  mpz_class scaled = num / den;
  std::string digits = scaled.get_str();
  if (static_cast<int>(digits.size()) <= places) {
    digits.insert(0, static_cast<std::size_t>(places + 1) - digits.size(), '0');
  }
  std::string out = sgn(q) < 0 && scaled != 0 ? "-" : "";
  out += digits.substr(0, digits.size() - places);
  if (places > 0) out += "." + digits.substr(digits.size() - places);
  return out;
}

}  // namespace peb
