#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cantor_simplex/error.hpp"

namespace cantor_simplex {

/// Exact rational; GMP keeps it in lowest terms with a positive denominator.
using Rational = mpq_class;

inline Rational make_rational(long num, unsigned long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// Parses "p/q" or "p". Throws MalformedInput on anything else or q == 0.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto slash = s.find('/');
  auto digits_ok = [](const std::string& part, bool allow_sign) {
    if (part.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (part[0] == '-' || part[0] == '+')) i = 1;
    if (i == part.size()) return false;
    for (; i < part.size(); ++i)
      if (part[i] < '0' || part[i] > '9') return false;
    return true;
  };
  std::string num = slash == std::string::npos ? s : s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!digits_ok(num, true) || !digits_ok(den, false))
    throw Error(ErrorKind::MalformedInput, "not a rational: '" + s + "'");
  if (num[0] == '+') num.erase(0, 1);
  mpz_class n(num, 10), d(den, 10);
  if (d == 0) throw Error(ErrorKind::MalformedInput, "zero denominator: '" + s + "'");
  Rational r(n, d);
  r.canonicalize();
  return r;
}

/// Always "p/q", including integers ("1/1") so the wire format has one shape.
inline std::string to_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline Rational ceil_div(const Rational& a, const Rational& b) {
  Rational q = a / b;
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(c);
}

inline mpz_class ceil_to_integer(const Rational& q) {
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return c;
}

inline mpz_class floor_to_integer(const Rational& q) {
  mpz_class c;
  mpz_fdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return c;
}

inline bool denominator_at_most(const Rational& r, std::uint64_t bound) {
  return r.get_den() <= bound;
}

}  // namespace cantor_simplex
