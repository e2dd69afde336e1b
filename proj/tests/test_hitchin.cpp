#include <gtest/gtest.h>

#include <random>

#include "dynr/hitchin.hpp"
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

const PhaseLayout kLayout{2, 1, 3};

/// Random polynomial of degree <= 2 with jet coefficients in two variables at order 2.
PhasePolynomial random_poly(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(-3, 3);
  PhasePolynomial P(kLayout.nvars());
  auto jet = [&] {
    std::map<std::vector<int>, Rational> t{{{0, 0}, Rational(c(rng))}, {{1, 0}, Rational(c(rng))},
                                           {{0, 1}, Rational(c(rng))}, {{1, 1}, Rational(c(rng))},
                                           {{2, 0}, Rational(c(rng))}};
    return JetScalar::from_terms(2, 2, t);
  };
  for (int k = 0; k < 4; ++k) {
    PhasePolynomial::Monomial e(kLayout.nvars(), 0);
    std::uniform_int_distribution<int> v(0, kLayout.nvars() - 1);
    ++e[v(rng)];
    if (k % 2) ++e[v(rng)];
    P.add_term(e, jet());
  }
  return P;
}

PhasePolynomial bracket(const PhasePolynomial& F, const PhasePolynomial& G) {
  return phase_bracket(LieData(2), kLayout, F, G);
}

const IdentityReport& find(const std::vector<IdentityReport>& v, const std::string& name) {
  for (auto& r : v)
    if (r.name == name) return r;
  throw std::runtime_error("missing report " + name);
}

}  // namespace

TEST(PhaseBracket, CanonicalPairDifferentiatesCoefficients) {
  const int n = kLayout.nvars();
  JetScalar u1 = JetScalar::variable(0, 2, 2);
  PhasePolynomial c = PhasePolynomial::constant(n, u1 * u1);
  PhasePolynomial p1 = PhasePolynomial::variable(n, kLayout.p(0));
  EXPECT_EQ(bracket(p1, c), PhasePolynomial::constant(n, u1 * JetScalar(Rational(2))));
}

TEST(PhaseBracket, LiePoissonOnLinearFunctions) {
  LieData lie(2);
  const int n = kLayout.nvars();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      PhasePolynomial want(n);
      for (int c = 0; c < 3; ++c)
        want += PhasePolynomial::variable(n, kLayout.mu(0, c)) * JetScalar(-lie.f(a, b, c));
      EXPECT_EQ(bracket(PhasePolynomial::variable(n, kLayout.mu(0, a)), PhasePolynomial::variable(n, kLayout.mu(0, b))),
                want);
    }
}

TEST(PhaseBracket, AntisymmetryLeibnizJacobi) {
  std::mt19937_64 rng(5);
  for (int s = 0; s < 5; ++s) {
    PhasePolynomial F = random_poly(rng), G = random_poly(rng), H = random_poly(rng);
    EXPECT_TRUE((bracket(F, G) + bracket(G, F)).is_zero());
    EXPECT_TRUE((bracket(F, G * H) - bracket(F, G) * H - G * bracket(F, H)).is_zero());
    // Second u-derivatives appear, so the identity is exact at the base point of order-2 jets.
    PhasePolynomial jac = bracket(F, bracket(G, H)) + bracket(G, bracket(H, F)) + bracket(H, bracket(F, G));
    EXPECT_TRUE(jac.truncated(0).is_zero()) << jac.str(kLayout);
  }
}

TEST(Hitchin, LaxMatrixHasSimplePolesWithMomentResidue) {
  for (int which : {1, 2}) {
    const KernelSet& ks = kernels(which);
    IdentityReport r = lax_pole_check(ks, lax_matrix(ks, 4));
    EXPECT_EQ(r.status(), Status::Pass) << which;
  }
}

TEST(Hitchin, GaudinHamiltonianIsLinearInMomenta) {
  const KernelSet& ks = kernels(1);
  PhasePolynomial H = gaudin_hamiltonian(ks, 0);
  const PhaseLayout P{ks.m(), ks.ell(), ks.dim()};
  for (auto& [e, c] : H.terms()) {
    int pdeg = 0;
    for (int a = 0; a < P.m; ++a) pdeg += e[a];
    EXPECT_LE(pdeg, 1);
  }
}

TEST(Hitchin, CommutativitySuiteD1) {
  auto reps = commutativity_suite(kernels(1), HitchinOptions{});
  for (auto& r : reps) EXPECT_EQ(r.status(), Status::Pass) << r.name;
  const auto& cas = find(reps, "casimir");
  EXPECT_EQ(cas.details.at("functional_span_rank"), "5");
  EXPECT_EQ(cas.details.at("casimir_dimension"), "1");
}

TEST(Hitchin, CommutativitySuiteD2) {
  auto reps = commutativity_suite(kernels(2), HitchinOptions{});
  for (auto& r : reps) EXPECT_EQ(r.status(), Status::Pass) << r.name;
  EXPECT_EQ(find(reps, "gaudin_commutativity").checked, 1);
  EXPECT_EQ(find(reps, "gaudin_hamiltonian_oracle").checked, 2);
  EXPECT_EQ(find(reps, "casimir").details.at("casimir_dimension"), "2");
}

TEST(Hitchin, OppositeLiePoissonSignBreaksCommutativity) {
  HitchinOptions o;
  o.lieSign = 1;
  auto reps = commutativity_suite(kernels(1), o);
  EXPECT_EQ(find(reps, "hamiltonian_commutativity").status(), Status::Fail);
}

TEST(Hitchin, LaxPairAtRandomPoints) {
  for (int which : {1, 2}) {
    IdentityReport r = lax_pair_check(kernels(which), {0, 0}, 5, 7);
    EXPECT_EQ(r.status(), Status::Pass) << which;
    EXPECT_EQ(r.details.at("polynomial_identities_nonzero"), "0");
  }
  IdentityReport r = lax_pair_check(kernels(1), {0, -2}, 5, 8);
  EXPECT_EQ(r.status(), Status::Pass);
}
