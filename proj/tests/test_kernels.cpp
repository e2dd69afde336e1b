#include <gtest/gtest.h>

#include <random>

#include "dynr/kernels.hpp"
#include "fixtures.hpp"

using namespace dynr;

namespace {

constexpr int kJetOrder = 2;

const KernelSet& kernels(int which) {
  static std::unique_ptr<KernelSet> cache[3];
  if (!cache[which]) {
    auto X = which == 1 ? dynr::testing::curve_d1() : dynr::testing::curve_d2();
    auto ch = search_chart(X, LieData(2), 1, 50, kJetOrder, 0, 2);
    cache[which] = std::make_unique<KernelSet>(ch, 3, 2, 24);
  }
  return *cache[which];
}

bool jet_equal(const LieVec& a, const LieVec& b, int order) { return (a - b).truncated(order).is_zero(); }

LaurentVec random_loop(std::mt19937_64& rng, const KernelSet& ks, int lo, int hi) {
  std::uniform_int_distribution<int> coef(-3, 3);
  LaurentVec out;
  for (int i = 0; i < ks.ell(); ++i) {
    Laurent<LieVec> L(i, lo, kExactDeg, 0, LieVec(ks.dim()));
    for (int e = lo; e <= hi; ++e) {
      LieVec v(ks.dim());
      for (int p = 0; p < ks.dim(); ++p) v[p] = JetScalar(Rational(coef(rng)));
      L.set(e, v);
    }
    out.push_back(L);
  }
  return out;
}

LieVec coeff_or_zero(const Laurent<LieVec>& L, int e, int d) {
  if (e < L.lo() || e > L.stored_hi()) return LieVec(d);
  return L.at(e);
}

}  // namespace

TEST(Kernels, ColumnsHavePrescribedPrincipalPart) {
  for (int which : {1, 2}) {
    const KernelSet& ks = kernels(which);
    const int d = ks.dim();
    for (int j = 0; j < ks.ell(); ++j)
      for (int k = 0; k <= 3; ++k)
        for (int a = 0; a < d; ++a) {
          RColumn col = ks.column(j, k, a);
          for (int beta = 0; beta < ks.m(); ++beta)
            EXPECT_TRUE(ks.chart().pair_xi(beta, col.G).is_zero()) << which << " " << j << k << a;
          for (int i = 0; i < ks.ell(); ++i) {
            Laurent<LieVec> L = ks.column_series(j, k, a, i, 2);
            for (int e = std::min(L.lo(), -k - 1); e < 0; ++e) {
              LieVec want = (i == j && e == -k - 1) ? ks.lie().dual_coords(a) : LieVec(d);
              EXPECT_TRUE(jet_equal(coeff_or_zero(L, e, d), want, ks.jet_order()))
                  << which << " col " << j << k << a << " at " << i << "," << e;
            }
          }
        }
  }
}

TEST(Kernels, ColumnsStableUnderLargerPoleBound) {
  // A second, independently sized solve reproduces the same columns.
  for (int which : {1, 2}) {
    const KernelSet& ks = kernels(which);
    KernelSet wide(ks.chart_ptr(), 3, 6, 24);
    for (int k = 0; k <= 2; ++k)
      for (int a = 0; a < ks.dim(); ++a)
        for (int i = 0; i < ks.ell(); ++i)
          for (int e = -3; e <= 4; ++e) {
            Opt1 x = ks.column_coeff(0, k, a, i, e), y = wide.column_coeff(0, k, a, i, e);
            ASSERT_TRUE(x && y);
            EXPECT_TRUE(jet_equal(*x, *y, ks.jet_order())) << which << " " << k << a << i << e;
          }
  }
}

TEST(Kernels, SeriesBeyondCapAreUnknown) {
  const KernelSet& ks = kernels(2);
  const int f = ks.column_cap() + 1;
  EXPECT_FALSE(ks.r().at(0, 0, 0, f).has_value());
  Opt2 pole = ks.r().at(0, 0, -f - 1, f);
  ASSERT_TRUE(pole.has_value());
  EXPECT_EQ(*pole, ks.gamma());
}

TEST(Kernels, LoopProjectionsMatchDirectDecomposition) {
  std::mt19937_64 rng(11);
  for (int which : {1, 2}) {
    const KernelSet& ks = kernels(which);
    const int d = ks.dim(), N = ks.jet_order();
    for (int s = 0; s < 10; ++s) {
      LaurentVec a = random_loop(rng, ks, -3, 1);
      LoopDecomposition dec = decompose_loop(ks.chart(), a);
      auto minus = project_kernel(ks, Projection::MinusLoop, a, -4, 3);
      auto plus = project_kernel(ks, Projection::PlusLoop, a, -4, 3);
      for (int i = 0; i < ks.ell(); ++i) {
        Laurent<LieVec> V = loop_v_part(ks.chart(), dec, i, 3);
        for (int e = -4; e <= 3; ++e) {
          ASSERT_TRUE(minus[i][e + 4] && plus[i][e + 4]);
          EXPECT_TRUE(jet_equal(*minus[i][e + 4], coeff_or_zero(V, e, d), N)) << which << " s" << s << " " << i << e;
          EXPECT_TRUE(jet_equal(*plus[i][e + 4] + *minus[i][e + 4], coeff_or_zero(a[i], e, d), N))
              << which << " s" << s << " " << i << e;
          if (e < 0) {
            EXPECT_TRUE(plus[i][e + 4]->truncated(N).is_zero());
          }
        }
      }
    }
  }
}

TEST(Kernels, FormProjectionsMatchDirectDecomposition) {
  std::mt19937_64 rng(13);
  for (int which : {1, 2}) {
    const KernelSet& ks = kernels(which);
    const int d = ks.dim(), N = ks.jet_order();
    for (int s = 0; s < 10; ++s) {
      LaurentVec w = random_loop(rng, ks, -3, 1);
      GlobalFormVector G = decompose_form(ks.chart(), w);
      auto plus = project_kernel(ks, Projection::PlusForm, w, -4, 3);
      auto minus = project_kernel(ks, Projection::MinusForm, w, -4, 3);
      for (int i = 0; i < ks.ell(); ++i) {
        Laurent<LieVec> P = ks.chart().expand(G, i, 3);
        for (int e = -4; e <= 3; ++e) {
          ASSERT_TRUE(plus[i][e + 4] && minus[i][e + 4]);
          EXPECT_TRUE(jet_equal(*plus[i][e + 4], coeff_or_zero(P, e, d), N)) << which << " s" << s << " " << i << e;
          EXPECT_TRUE(jet_equal(*plus[i][e + 4] + *minus[i][e + 4], coeff_or_zero(w[i], e, d), N))
              << which << " s" << s << " " << i << e;
        }
      }
    }
  }
}

TEST(Kernels, RhoRestoresXiDirections) {
  // Pi_+ kills V, and the t-correction returns xi_a itself.
  for (int which : {1, 2}) {
    const KernelSet& ks = kernels(which);
    const int N = ks.jet_order(), lo = -ks.chart().xi_pole();
    for (int al = 0; al < ks.m(); ++al) {
      LaurentVec x;
      for (int i = 0; i < ks.ell(); ++i) x.push_back(ks.chart().xi_coords(al, i));
      auto got = pair_first(ks.lie(), ks.rho(), x, lo, 3);
      auto got_r = pair_first(ks.lie(), ks.r(), x, lo, 3);
      for (int j = 0; j < ks.ell(); ++j)
        for (int f = lo; f <= 3; ++f) {
          ASSERT_TRUE(got[j][f - lo] && got_r[j][f - lo]);
          Opt1 want = ks.xi(al).at(j, f);
          EXPECT_TRUE(jet_equal(*got[j][f - lo], *want, N)) << which << " " << al << " " << j << f;
          EXPECT_TRUE(got_r[j][f - lo]->truncated(N).is_zero()) << which << " " << al << " " << j << f;
        }
    }
  }
}
