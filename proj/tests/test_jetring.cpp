#include <gtest/gtest.h>

#include <random>

#include "dynr/audit.hpp"
#include "dynr/laurent.hpp"

using namespace dynr;

namespace {

JetScalar random_jet(std::mt19937_64& rng, int nvars, int order) {
  std::uniform_int_distribution<int> coef(-4, 4);
  std::map<std::vector<int>, Rational> terms;
  const auto& t = MonomialTable::get(nvars, order);
  for (int i = 0; i < t.size(); ++i)
    if (int c = coef(rng)) terms[t.exps(i)] = make_rational(c, 1 + (i % 3));
  return JetScalar::from_terms(nvars, order, terms);
}

Laurent<Rational> random_series(std::mt19937_64& rng, int lo, int cert) {
  std::uniform_int_distribution<int> coef(-5, 5);
  Laurent<Rational> s(0, lo, cert, 0, Rational(0));
  for (int d = lo; d <= cert; ++d) s.set(d, make_rational(coef(rng), 1 + (d & 1)));
  return s;
}

}  // namespace

TEST(Jet, MonomialDerivative) {
  auto u1 = JetScalar::variable(0, 2, 2), u2 = JetScalar::variable(1, 2, 2);
  EXPECT_EQ((u1 * u2).derive(0), u2);
  EXPECT_TRUE(JetScalar(1).derive(0).is_zero());
}

TEST(Jet, DerivativeMatchesDifferenceQuotient) {
  // 3/2 u1^2: the exact difference quotient of a quadratic is central-difference exact.
  auto u1 = JetScalar::variable(0, 1, 2);
  JetScalar s = JetScalar(Rational(3, 2)) * u1 * u1;
  JetScalar ds = s.derive(0);
  for (int k = -3; k <= 3; ++k) {
    Rational x = make_rational(k, 2), h = make_rational(1, 7);
    Rational dq = (s.evaluate({x + h}) - s.evaluate({x - h})) / (2 * h);
    EXPECT_EQ(ds.evaluate({x}), dq);
  }
  EXPECT_EQ(ds.order(), 1);
}

TEST(Jet, RingAxiomsOnRandomTriples) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_jet(rng, 3, 3), b = random_jet(rng, 3, 3), c = random_jet(rng, 3, 3);
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * b, b * a);
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ((a * b).constant(), a.constant() * b.constant());
  }
}

TEST(Jet, LeibnizAndInverse) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_jet(rng, 2, 3), b = random_jet(rng, 2, 3);
    EXPECT_EQ((a * b).derive(1), a.derive(1) * b + a * b.derive(1));
    if (sgn(a.constant()) != 0) {
      EXPECT_EQ(a * a.inverse(), JetScalar(1));
    }
  }
  EXPECT_THROW(JetScalar::variable(0, 2, 2).inverse(), Error);
}

TEST(Laurent, WindowCalculusDefinition) {
  Laurent<Rational> a(0, 0, 5, 0, Rational(0)), b(0, -2, 3, 0, Rational(0));
  a.set(0, 1);
  b.set(-2, 1);
  EXPECT_EQ(laurent_mul(a, b).certified_to(), 3);
  auto p = laurent_mul(Laurent<Rational>::monomial(0, -1, 1), Laurent<Rational>::monomial(0, 1, 1));
  EXPECT_EQ(p.lo(), 0);
  EXPECT_EQ(p.at(0), 1);
  EXPECT_THROW(laurent_mul(Laurent<Rational>::monomial(0, 0, 1), Laurent<Rational>::monomial(1, 0, 1)),
               Error);
}

TEST(Laurent, HigherPrecisionOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_series(rng, -2, 18), b = random_series(rng, 1, 18);
    auto lowA = a.truncated(8), lowB = b.truncated(8);
    auto lo = laurent_mul(lowA, lowB), hi = laurent_mul(a, b);
    for (int d = lo.lo(); d <= lo.certified_to(); ++d) EXPECT_EQ(lo.at(d), hi.at(d));
    auto inv = series_invert(b.truncated(8)), invHi = series_invert(b);
    for (int d = inv.lo(); d <= inv.certified_to(); ++d) EXPECT_EQ(inv.at(d), invHi.at(d));
  }
}

TEST(Laurent, GeometricSeriesAndSqrt) {
  Laurent<Rational> a(0, 0, kExactDeg, 0, Rational(0));
  a.set(0, 1);
  a.set(1, -1);
  auto inv = series_invert(a, 10);
  for (int d = 0; d <= 10; ++d) EXPECT_EQ(inv.at(d), 1);
  Laurent<Rational> b(0, 0, kExactDeg, 0, Rational(0));
  b.set(0, 1);
  b.set(10, -1);
  auto s = series_sqrt(b, 40);
  EXPECT_EQ(s.at(10), Rational(-1, 2));
  EXPECT_EQ(s.at(20), Rational(-1, 8));
  auto sq = laurent_mul(s, s);
  for (int d = 0; d <= sq.certified_to(); ++d) EXPECT_EQ(sq.at(d), b.at(d)) << d;
  EXPECT_GE(sq.certified_to(), 40);
  Laurent<Rational> two = Laurent<Rational>::monomial(0, 0, Rational(2));
  EXPECT_THROW(series_sqrt(two), Error);
}

TEST(Laurent, ResidueRules) {
  EXPECT_EQ(residue(Laurent<Rational>::monomial(0, -1, 1, 1)), 1);
  EXPECT_EQ(residue(Laurent<Rational>::monomial(0, 0, 1, 1)), 0);
  // residue of a derivative vanishes
  std::mt19937_64 rng(5);
  auto g = random_series(rng, -4, 6);
  EXPECT_EQ(residue(g.derivative().with_weight(1)), 0);
}

TEST(Laurent, ExpressionDagOracle) {
  // Fifty random DAGs re-evaluated with ten extra certified degrees on every leaf.
  WindowAudit a = audit_window_calculus(20240611, 50);
  EXPECT_EQ(a.dags, 50);
  EXPECT_GT(a.nodes, 150);
  EXPECT_GT(a.checked, 1000);
  EXPECT_EQ(a.mismatches, 0);
  EXPECT_EQ(a.uncovered, 0);
  for (size_t i = 0; i < std::min<size_t>(a.failures.size(), 5); ++i) ADD_FAILURE() << a.failures[i];
}

TEST(Laurent, ExpressionDagOracleDetectsOverclaim) {
  WindowAudit a = audit_window_calculus(20240611, 50, 8, 6, 10, 1);
  EXPECT_GT(a.mismatches, 0);
  EXPECT_FALSE(a.pass());
}
