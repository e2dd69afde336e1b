#include <gtest/gtest.h>

#include "dynr/yangbaxter.hpp"
#include "fixtures.hpp"

using namespace dynr;

namespace {

const KernelSet& kernels(int which) {
  static std::unique_ptr<KernelSet> cache[3];
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (!cache[which]) {
    auto X = which == 1 ? dynr::testing::curve_d1() : dynr::testing::curve_d2();
    auto ch = search_chart(X, LieData(2), 1, 50, 2, 0, 2);
    cache[which] = std::make_unique<KernelSet>(ch, 3, 2, 40);
  }
  return *cache[which];
}

void expect_pass(const IdentityReport& r) {
  EXPECT_EQ(r.status(), Status::Pass) << r.name << " nonzero=" << r.nonzero << " checked=" << r.checked
                                      << (r.samples.empty() ? "" : " first " + r.samples.front());
  EXPECT_EQ(r.unknown, 0) << r.name;
  EXPECT_GT(r.checked, 0) << r.name;
}

/// r with a single coefficient shifted by the identity tensor.
Series2 perturbed(const Series2& r, int e0, int f0) {
  return Series2(
      r.ell(), r.dim(), [r](int i, int j, int f) { return r.xlo(i, j, f); },
      [r](int i, int j, int e) { return r.ylo(i, j, e); },
      [r, e0, f0](int i, int j, int e, int f) -> Opt2 {
        Opt2 v = r.at(i, j, e, f);
        if (!v || i != 0 || j != 0 || e != e0 || f != f0) return v;
        Ten2 w = *v;
        for (int p = 0; p < w.d; ++p) w(p, p) = w(p, p) + JetScalar(Rational(1));
        return w;
      });
}

}  // namespace

class Scenario : public ::testing::TestWithParam<int> {};

TEST_P(Scenario, DcybeHolds) { expect_pass(dcybe_residual(kernels(GetParam()))); }

TEST_P(Scenario, DcybeNegativeControlFails) {
  IdentityReport r = dcybe_residual(kernels(GetParam()), true);
  EXPECT_EQ(r.status(), Status::Fail);
}

TEST_P(Scenario, ExtendedDcybeHolds) { expect_pass(extended_dcybe_residual(kernels(GetParam()))); }

TEST_P(Scenario, AuxiliaryIdentityHolds) { expect_pass(auxiliary_identity(kernels(GetParam()))); }

TEST_P(Scenario, SzegoPropertiesHold) { expect_pass(szego_check(kernels(GetParam()), 4)); }

TEST_P(Scenario, RBracketLemmaHolds) { expect_pass(r_bracket_lemma(kernels(GetParam()), 1, 3)); }

TEST_P(Scenario, HitchinWeakIdentityHolds) {
  expect_pass(hitchin_weak_identity(kernels(GetParam()), 1, 2, false));
}

TEST_P(Scenario, HitchinWeakIdentityExtendedHolds) {
  expect_pass(hitchin_weak_identity(kernels(GetParam()), 1, 2, true));
}

INSTANTIATE_TEST_SUITE_P(Curves, Scenario, ::testing::Values(1, 2),
                         [](const auto& info) { return "D" + std::to_string(info.param); });

TEST(YangBaxter, WeakPairingIdentityHolds) { expect_pass(weak_phi_psi(kernels(1), 3, 1)); }

TEST(YangBaxter, PerturbedKernelIsDetected) {
  const KernelSet& ks = kernels(1);
  const int K = ks.K();
  ks.ensure_columns(dcybe_columns(K));
  for (auto [e0, f0] : {std::pair{0, 0}, std::pair{-1, 1}}) {
    Series2 bad = perturbed(ks.r(), e0, f0);
    Series3 res = cybe_lhs(ks.lie(), ks.rbar(), bad) - dynamical_term(ks, partials(ks, bad));
    IdentityReport r = check_zero3("mutant", res, dcybe_window(K, -K - 1, K), ks.jet_order() - 1);
    EXPECT_EQ(r.status(), Status::Fail) << e0 << "," << f0;
  }
}

TEST(YangBaxter, EmptyWindowIsInconclusive) {
  const KernelSet& ks = kernels(1);
  IdentityReport r = check_zero3("empty", cybe_lhs(ks.lie(), ks.rbar(), ks.r()), Window3{}, 1);
  EXPECT_EQ(r.status(), Status::Inconclusive);
  EXPECT_STREQ(status_name(r.status()), "FAIL-INCONCLUSIVE");
}

TEST(YangBaxter, UnknownCoefficientsAreNotCounted) {
  // A kernel capped at two columns cannot certify the full window.
  auto ch = kernels(1).chart_ptr();
  KernelSet small(ch, 3, 2, 2);
  IdentityReport r = dcybe_residual(small);
  EXPECT_GT(r.unknown, 0);
  EXPECT_EQ(r.nonzero, 0);
}
