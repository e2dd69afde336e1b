#include <gtest/gtest.h>

#include <random>

#include "dynr/chart.hpp"
#include "fixtures.hpp"

using namespace dynr;

namespace {

constexpr int kJetOrder = 2;

std::shared_ptr<BundleChart> found_chart(int which) {
  static std::shared_ptr<BundleChart> cache[3];
  if (!cache[which]) {
    auto X = which == 1 ? dynr::testing::curve_d1() : dynr::testing::curve_d2();
    cache[which] = search_chart(X, LieData(2), 1, 50, kJetOrder, 0, 2);
  }
  return cache[which];
}

std::string spec_string(const ChartSpec& s) {
  std::string out;
  for (auto& f : s.sigma0)
    out += std::to_string(f.puncture) + ":" + std::to_string(f.row) + std::to_string(f.col) + ":" +
           to_string(f.coeff) + ":" + std::to_string(f.power) + ";";
  out += "|";
  for (auto& terms : s.eta) {
    for (auto& t : terms)
      out += std::to_string(t.puncture) + ":" + std::to_string(t.basis) + ":" + std::to_string(t.power) + ":" +
             to_string(t.coeff) + ",";
    out += ";";
  }
  return out;
}

void expect_coframe(const BundleChart& ch) {
  ASSERT_EQ(ch.m(), 3);
  ASSERT_EQ(static_cast<int>(ch.omega().size()), 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) EXPECT_EQ(ch.pair_xi(a, ch.omega()[b]), JetScalar(a == b ? 1 : 0)) << a << "," << b;
  for (auto& w : ch.omega())
    for (int i = 0; i < ch.ell(); ++i) EXPECT_GE(ch.expand(w, i, 2).valuation(), 0);
}

}  // namespace

TEST(Chart, TrivialSigmaIsNotTransversal) {
  auto X = dynr::testing::curve_d1();
  LieData lie(2);
  ChartSpec spec = default_eta_spec(X, lie, {});
  EXPECT_THROW(
      {
        try {
          build_chart(X, lie, spec, kJetOrder);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::NotTransversal);
          throw;
        }
      },
      Error);
  GroupElement hi = chart_sigma(lie, 1, spec, 3, kJetOrder + 1);
  BundleChart ch(X, lie, hi, kJetOrder, 3, spec);
  Certificate c = certify(ch, 0);
  EXPECT_EQ(c.h0_unknowns - c.h0_rank, 3);
  EXPECT_FALSE(c.transversal());
}

TEST(Chart, SearchFindsCertifiedChartD1) {
  auto ch = found_chart(1);
  EXPECT_TRUE(ch->certificate().passed());
  EXPECT_EQ(ch->certificate().complement_dim, 3);
  expect_coframe(*ch);
}

TEST(Chart, SearchFindsCertifiedChartD2) {
  auto ch = found_chart(2);
  EXPECT_TRUE(ch->certificate().passed());
  EXPECT_EQ(ch->certificate().complement_dim, 3);
  expect_coframe(*ch);
}

TEST(Chart, ExponentialHasBoundedJetSupport) {
  auto ch = found_chart(1);
  // degree <= 2 in three nilpotent variables: at most 1 + 3 + 6 monomials
  for (auto& blk : ch->sigma().g)
    for (int e = blk.lo(); e <= blk.stored_hi(); ++e)
      for (auto& x : blk.at(e).entries()) {
        EXPECT_LE(static_cast<int>(x.terms().size()), 10);
        EXPECT_LE(x.degree(), kJetOrder);
      }
}

TEST(Chart, FlatnessOfFrame) {
  for (int which : {1, 2}) {
    auto ch = found_chart(which);
    const int low = ch->jet_order() - 1;
    for (int a = 0; a < ch->m(); ++a)
      for (int b = a + 1; b < ch->m(); ++b) {
        LieSeries F = ch->xi(b).derive(a) - ch->xi(a).derive(b) + bracket(ch->xi(a), ch->xi(b));
        F = F.truncated_jets(low);
        for (int i = 0; i < ch->ell(); ++i) EXPECT_TRUE(F[i].is_zero()) << which << " " << a << b;
      }
  }
}

TEST(Chart, ConnectionStabilizesConjugatedLoops) {
  std::mt19937_64 rng(7);
  for (int which : {1, 2}) {
    auto ch = found_chart(which);
    const LieData& lie = ch->lie();
    std::uniform_int_distribution<int> pb(0, lie.dim() - 1), pj(0, 8), pa(0, ch->m() - 1);
    for (int s = 0; s < 10; ++s) {
      const int b = pb(rng), j = pj(rng), a = pa(rng);
      const OuterFunction phi = ch->basis_element(OuterKind::Function, j);
      for (int i = 0; i < ch->ell(); ++i) {
        MatSeries loop = phi.expansion(ch->curve(), i, 4 + 2 * ch->sigma_shift() + ch->xi_pole()).map([&](const Rational& r) { return lie.basis(b) * r; });
        MatSeries A = laurent_mul(laurent_mul(ch->sigma().ginv[i], loop), ch->sigma().g[i]);
        MatSeries D = A.map([a](const Mat& x) { return x.derive(a); }) +
                      laurent_mul_with(ch->xi(a)[i], A, [](const Mat& x, const Mat& y) { return commutator(x, y); });
        D = D.map([&](const Mat& x) { return x.truncated(ch->jet_order() - 1); });
        EXPECT_GE(D.certified_to(), 0);
        EXPECT_TRUE(D.is_zero()) << which << " b" << b << " j" << j << " a" << a;
      }
    }
  }
}

TEST(Chart, SearchIsDeterministic) {
  auto X = dynr::testing::curve_d1();
  std::vector<SearchLogEntry> l1, l2;
  auto c1 = search_chart(X, LieData(2), 1, 50, kJetOrder, 0, 2, &l1);
  auto c2 = search_chart(X, LieData(2), 1, 50, kJetOrder, 0, 2, &l2);
  EXPECT_EQ(spec_string(*c1->spec()), spec_string(*c2->spec()));
  ASSERT_EQ(l1.size(), l2.size());
  for (size_t k = 0; k < l1.size(); ++k) EXPECT_EQ(l1[k].outcome, l2[k].outcome);
  for (int a = 0; a < 3; ++a) {
    auto& w1 = c1->omega()[a].coeffs;
    auto& w2 = c2->omega()[a].coeffs;
    ASSERT_EQ(w1.size(), w2.size());
    for (size_t j = 0; j < w1.size(); ++j) EXPECT_EQ(w1[j], w2[j]);
  }
}

TEST(Chart, ZeroAttemptsExhaustSearch) {
  auto X = dynr::testing::curve_d1();
  try {
    search_chart(X, LieData(2), 1, 0, kJetOrder, 0, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SearchExhausted);
  }
}

TEST(Chart, DeeperCertificateStillPasses) {
  for (int which : {1, 2}) {
    auto ch = found_chart(which);
    Certificate c = certify(*ch, ch->certificate().depth + 4);
    EXPECT_TRUE(c.transversal()) << detail::describe(c);
    EXPECT_EQ(c.depth, ch->certificate().depth + 4);
  }
}

TEST(Chart, RebuildFromSpecReproducesChart) {
  // A chart built directly from a spec reproduces the searched chart.
  auto ch = found_chart(2);
  auto again = build_chart(ch->curve(), ch->lie(), *ch->spec(), kJetOrder);
  EXPECT_EQ(again->certificate().complement_dim, 3);
  expect_coframe(*again);
}
