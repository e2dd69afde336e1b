#include <gtest/gtest.h>

#include <set>

#include "dynr/curve.hpp"
#include "fixtures.hpp"

using namespace dynr;
using dynr::testing::curve_d1;
using dynr::testing::curve_d2;
using dynr::testing::poly;

TEST(Curve, ModelsAndErrors) {
  auto d1 = curve_d1();
  EXPECT_EQ(d1.model(), Model::Odd);
  EXPECT_EQ(d1.genus(), 2);
  EXPECT_EQ(d1.punctures(), 1);
  auto d2 = curve_d2();
  EXPECT_EQ(d2.model(), Model::Even);
  EXPECT_EQ(d2.punctures(), 2);
  auto code = [](const Poly& f) {
    try {
      CurveModel c(f);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  EXPECT_EQ(code(poly({0, 0, 1, 0, 0, 1})), ErrorCode::NotSquarefree);  // x^2 (x^3 + 1)
  EXPECT_EQ(code(poly({1, 0, 0, 1})), ErrorCode::GenusTooSmall);
  EXPECT_EQ(code(poly({1, 1, 0, 0, 0, 0, 2})), ErrorCode::LeadingNotSquare);
  EXPECT_EQ(code(poly({1, 1})), ErrorCode::BadDegree);
}

TEST(Curve, YExpansionSquaresToF) {
  for (auto X : {curve_d1(), curve_d2()}) {
    for (int i = 0; i < X.punctures(); ++i) {
      auto y = X.y_expansion(i, 30);
      auto fx = CurveModel::poly_at(X.f(), X.x_expansion(i), 0);
      auto y2 = laurent_mul(y, y);
      ASSERT_GE(y2.certified_to(), 20);
      for (int d = y2.lo(); d <= y2.certified_to(); ++d) EXPECT_EQ(y2.at(d), fx.at(d)) << d;
    }
  }
  // D1: y = z^-5 (1 - z^10/2 - z^20/8 - ...)
  auto y = curve_d1().y_expansion(0, 20);
  EXPECT_EQ(y.at(-5), 1);
  EXPECT_EQ(y.at(5), make_rational(-1, 2));
  EXPECT_EQ(y.at(15), make_rational(-1, 8));
  EXPECT_EQ(y.at(0), 0);
}

TEST(Curve, BasisCountsFollowRiemannRoch) {
  auto d1 = curve_d1();
  auto b = outer_basis(d1, OuterKind::Function, 7);
  std::vector<int> poles;
  for (auto& f : b) poles.push_back(f.pole_order(d1));
  EXPECT_EQ(poles, (std::vector<int>{0, 2, 4, 5, 6, 7}));
  for (int P = 3; P <= 15; ++P) {  // l*P > 2g - 2
    EXPECT_EQ(static_cast<int>(outer_basis(d1, OuterKind::Function, P).size()), P - 2 + 1);
  }
  auto d2 = curve_d2();
  for (int P = 2; P <= 12; ++P) EXPECT_EQ(static_cast<int>(outer_basis(d2, OuterKind::Function, P).size()), 2 * P - 1);
  auto forms = outer_basis(d1, OuterKind::Form, 0);
  ASSERT_EQ(forms.size(), 2u);
  EXPECT_EQ(forms[0].pole_order(d1), -2);
  EXPECT_EQ(forms[1].pole_order(d1), 0);
}

TEST(Curve, WeierstrassGaps) {
  auto d1 = curve_d1();
  std::set<int> realized;
  for (auto& f : outer_basis(d1, OuterKind::Function, 30)) realized.insert(f.pole_order(d1));
  for (int k = 0; k <= 30; ++k) EXPECT_EQ(realized.count(k) == 0, k == 1 || k == 3) << k;
}

TEST(Curve, ExpansionValuationMatchesPoleOrder) {
  for (auto X : {curve_d1(), curve_d2()})
    for (auto kind : {OuterKind::Function, OuterKind::Form})
      for (auto& f : outer_basis(X, kind, 9))
        for (int i = 0; i < X.punctures(); ++i)
          EXPECT_EQ(f.expansion(X, i, 12).valuation(), -f.pole_order(X)) << f.str();
}

TEST(Curve, ResidueTheorem) {
  auto d1 = curve_d1();
  auto d2 = curve_d2();
  OuterFunction dx = OuterFunction::xy_power(0, OuterKind::Form);  // y * dx/y
  EXPECT_EQ(residue_sum(d1, dx), 0);
  EXPECT_EQ(residue_sum(d2, OuterFunction::x_power(1, OuterKind::Form)), 0);
  EXPECT_EQ(residue_sum(d1, OuterFunction::x_power(2, OuterKind::Form)), 0);
  // individual residues at the two points of D2 cancel
  auto w = OuterFunction::x_power(1, OuterKind::Form);
  EXPECT_EQ(residue(w.expansion(d2, 0, -1)), -residue(w.expansion(d2, 1, -1)));
  for (auto& f : outer_basis(d2, OuterKind::Form, 8)) EXPECT_EQ(residue_sum(d2, f), 0) << f.str();
}
