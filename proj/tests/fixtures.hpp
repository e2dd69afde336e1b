#pragma once
// Shared scenario constructors for the unit tests.

#include "dynr/curve.hpp"

namespace dynr::testing {

inline Poly poly(std::initializer_list<long> coeffsLowToHigh) {
  Poly p;
  for (long c : coeffsLowToHigh) p.c.push_back(Rational(c));
  return p;
}
/// y^2 = x^5 - 1
inline CurveModel curve_d1() { return CurveModel(poly({-1, 0, 0, 0, 0, 1})); }
/// y^2 = x^6 + x + 1
inline CurveModel curve_d2() { return CurveModel(poly({1, 1, 0, 0, 0, 0, 1})); }

}  // namespace dynr::testing
