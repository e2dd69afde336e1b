#include <gtest/gtest.h>

#include "dynr/gauge.hpp"
#include "fixtures.hpp"

using namespace dynr;

namespace {

const KernelSet& kernels(int which) {
  static std::unique_ptr<KernelSet> cache[3];
  if (!cache[which]) {
    auto X = which == 1 ? dynr::testing::curve_d1() : dynr::testing::curve_d2();
    auto ch = search_chart(X, LieData(2), 1, 50, 2, 0, 2);
    cache[which] = std::make_unique<KernelSet>(ch, 3, 2, 40);
  }
  return *cache[which];
}

void expect_all_pass(const GaugeResult& g) {
  ASSERT_EQ(g.relations.size(), 5u);
  for (auto& r : g.relations) {
    EXPECT_EQ(r.status(), Status::Pass) << g.summary.name << " " << r.name << " nonzero=" << r.nonzero
                                        << (r.samples.empty() ? "" : " first " + r.samples.front());
    EXPECT_EQ(r.unknown, 0) << r.name;
  }
}

}  // namespace

TEST(Gauge, IdentityLeavesEverythingUnchanged) {
  const KernelSet& ks = kernels(1);
  GaugeResult g = gauge_transform(ks, GaugeSpec{"identity", {}, {}});
  expect_all_pass(g);
  Opt2 a = g.kernels->r().at(0, 0, 1, 2), b = ks.r().at(0, 0, 1, 2);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(*a, *b);
}

TEST(Gauge, ConstantUnipotentInnerFactorConjugatesCoframe) {
  const KernelSet& ks = kernels(1);
  GaugeResult g = gauge_transform(ks, GaugeSpec{"const", {{0, 1, 0, 0, -1, Rational(3)}}, {}});
  expect_all_pass(g);
  // Without g_- the outer correction term vanishes.
  EXPECT_EQ(g.summary.details.at("rho_opposite_sign_nonzero"), "0");
}

TEST(Gauge, DefaultSpecsMatchRecomputation) {
  for (int which : {1, 2}) {
    const KernelSet& ks = kernels(which);
    for (auto& spec : default_gauge_specs(ks.ell())) expect_all_pass(gauge_transform(ks, spec));
  }
}

TEST(Gauge, OppositeOuterSignIsRejected) {
  const KernelSet& ks = kernels(1);
  GaugeResult g = gauge_transform(ks, default_gauge_specs(ks.ell())[0]);
  EXPECT_NE(g.summary.details.at("rho_opposite_sign_nonzero"), "0");
}

TEST(Gauge, InnerFactorWithPoleIsRejected) {
  const KernelSet& ks = kernels(1);
  try {
    gauge_transform(ks, GaugeSpec{"bad", {{0, 0, 1, -1, -1, Rational(1)}}, {}});
    FAIL() << "expected NotInnerOuter";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInnerOuter);
  }
}
