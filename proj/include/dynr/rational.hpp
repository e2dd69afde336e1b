#pragma once
#include <gmpxx.h>

#include <optional>
#include <string>

#include "dynr/error.hpp"

namespace dynr {

using Rational = mpq_class;

inline Rational make_rational(long p, long q = 1) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

/// "p/q" text form; integers keep the "/1" so every value has one shape.
inline std::string to_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline Rational parse_rational(const std::string& s) {
  Rational r;
  if (s.empty() || r.set_str(s, 10) != 0 || r.get_den() == 0)
    throw Error(ErrorCode::ParseError, "bad rational '" + s + "'");
  r.canonicalize();
  return r;
}

/// Exact square root if one exists in Q.
inline std::optional<Rational> rational_sqrt(const Rational& r) {
  if (sgn(r) < 0) return std::nullopt;
  mpz_class n = r.get_num(), d = r.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t()))
    return std::nullopt;
  mpz_class sn, sd;
  mpz_sqrt(sn.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(sd.get_mpz_t(), d.get_mpz_t());
  Rational out(sn, sd);
  out.canonicalize();
  return out;
}

}  // namespace dynr
