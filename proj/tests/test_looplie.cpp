#include <gtest/gtest.h>

#include <random>

#include "dynr/loop.hpp"

using namespace dynr;

namespace {

Mat random_sl(const LieData& lie, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(-3, 3);
  LieVec v(lie.dim());
  for (int a = 0; a < lie.dim(); ++a) v[a] = JetScalar(c(rng));
  return lie.matrix(v);
}

LieSeries random_series(const LieData& lie, std::mt19937_64& rng, int lo, int hi, int weight) {
  LieSeries s = LieSeries::zero(lie.n(), 1, weight);
  for (int k = lo; k <= hi; ++k) s = s + LieSeries::monomial(lie.n(), 1, 0, k, random_sl(lie, rng), weight);
  return s;
}

}  // namespace

TEST(Lie, DualBasisAndCasimirForSl2) {
  LieData lie(2);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      EXPECT_EQ(LieData::trace_product(lie.basis(a), lie.dual(b)).constant(), a == b ? 1 : 0);
  // gamma = e(x)f + f(x)e + 1/2 h(x)h, basis order e, f, h
  EXPECT_EQ(lie.gamma(0, 1), 1);
  EXPECT_EQ(lie.gamma(1, 0), 1);
  EXPECT_EQ(lie.gamma(2, 2), make_rational(1, 2));
  EXPECT_EQ(lie.gamma(0, 0), 0);
  EXPECT_EQ(lie.gamma(2, 0), 0);
}

TEST(Lie, CasimirInvarianceAndFormInvariance) {
  for (int n : {2, 3}) {
    LieData lie(n);
    const int d = lie.dim();
    for (int x = 0; x < d; ++x) {
      // [x (x) 1 + 1 (x) x, gamma] in components
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) {
          Rational s = 0;
          for (int a = 0; a < d; ++a) s += lie.f(x, a, p) * lie.gamma(a, q) + lie.f(x, a, q) * lie.gamma(p, a);
          EXPECT_EQ(s, 0);
          EXPECT_EQ(lie.gamma(p, q), lie.gamma(q, p));
        }
      for (int y = 0; y < d; ++y)
        for (int w = 0; w < d; ++w) {
          auto X = lie.unit(x), Y = lie.unit(y), W = lie.unit(w);
          EXPECT_EQ(lie.kappa(lie.bracket(X, Y), W) + lie.kappa(Y, lie.bracket(X, W)), JetScalar(0));
        }
    }
  }
}

TEST(Loop, PairingExamples) {
  const int n = 2;
  Mat e = Mat::unit(n, 0, 1), f = Mat::unit(n, 1, 0);
  auto a = LieSeries::monomial(n, 1, 0, 2, e);
  EXPECT_EQ(pair_B(a, LieSeries::monomial(n, 1, 0, -3, f, 1)), JetScalar(1));
  EXPECT_EQ(pair_B(a, LieSeries::monomial(n, 1, 0, -2, f, 1)), JetScalar(0));
}

TEST(Loop, BracketBasics) {
  const int n = 2;
  Mat e = Mat::unit(n, 0, 1), f = Mat::unit(n, 1, 0);
  Mat h = Mat::unit(n, 0, 0) - Mat::unit(n, 1, 1);
  EXPECT_EQ(commutator(e, f), h);
  LieData lie(2);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    auto a = random_series(lie, rng, -2, 2, 0), b = random_series(lie, rng, -1, 3, 0),
         c = random_series(lie, rng, 0, 2, 1);
    EXPECT_TRUE(bracket(a, a).blocks()[0].is_zero());
    auto jac = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b));
    EXPECT_TRUE(jac[0].is_zero());
  }
  auto w = random_series(lie, rng, 0, 1, 1);
  EXPECT_THROW(bracket(w, w), Error);
}

TEST(Loop, AdjointActionPreservesPairing) {
  LieData lie(2);
  const int n = 2;
  // diagonal constant sigma = diag(t, 1/t): Ad(sigma) e = t^2 e
  GroupElement s = GroupElement::identity(n, 1);
  Mat d(n), di(n);
  d(0, 0) = JetScalar(3);
  d(1, 1) = JetScalar(make_rational(1, 3));
  di(0, 0) = JetScalar(make_rational(1, 3));
  di(1, 1) = JetScalar(3);
  s.g[0] = MatSeries::monomial(0, 0, d);
  s.ginv[0] = MatSeries::monomial(0, 0, di);
  auto conj = ad_conjugate(s, LieSeries::monomial(n, 1, 0, 0, Mat::unit(n, 0, 1)));
  EXPECT_EQ(conj[0].at(0), Mat::unit(n, 0, 1) * Rational(9));

  // unipotent Laurent sigma = (1 + 2 z^-1 e)(1 - z f)
  GroupElement u1 = GroupElement::identity(n, 1), u2 = GroupElement::identity(n, 1);
  u1.g[0] = u1.g[0] + MatSeries::monomial(0, -1, Mat::unit(n, 0, 1, JetScalar(2)));
  u1.ginv[0] = u1.ginv[0] - MatSeries::monomial(0, -1, Mat::unit(n, 0, 1, JetScalar(2)));
  u2.g[0] = u2.g[0] - MatSeries::monomial(0, 1, Mat::unit(n, 1, 0));
  u2.ginv[0] = u2.ginv[0] + MatSeries::monomial(0, 1, Mat::unit(n, 1, 0));
  GroupElement sig = u1 * u2;
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    auto a = random_series(lie, rng, -3, 4, 0), w = random_series(lie, rng, -4, 3, 1);
    EXPECT_EQ(pair_B(ad_conjugate(sig, a), ad_conjugate(sig, w)), pair_B(a, w));
  }
}
