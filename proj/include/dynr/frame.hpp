#pragma once
// Report-form checks of the chart frame and of the kernel projections.

#include <random>
#include <string>
#include <vector>

#include "dynr/kernels.hpp"
#include "dynr/yangbaxter.hpp"

namespace dynr {

/// Rank certificate of the chart as a report; one checked point per certificate condition.
inline IdentityReport chart_certificate_report(const BundleChart& ch) {
  const Certificate& c = ch.certificate();
  IdentityReport rep;
  rep.name = "chart_certificate";
  rep.window = "principal parts to depth " + std::to_string(c.depth);
  rep.record(c.h0_trivial(), "global sections " + std::to_string(c.h0_rank) + "/" + std::to_string(c.h0_unknowns));
  rep.record(c.complement_ok(),
             "complement " + std::to_string(c.complement_dim) + "/" + std::to_string(c.expected_dim));
  rep.record(c.eta_spans(), "modes " + std::to_string(c.eta_rank_gain) + "/" + std::to_string(c.eta_target));
  rep.record(c.kernel_nonsingular(),
             "coframe rank " + std::to_string(c.kernel_rank) + "/" + std::to_string(c.kernel_unknowns));
  rep.details["complement_dim"] = std::to_string(c.complement_dim);
  rep.details["expected_dim"] = std::to_string(c.expected_dim);
  rep.details["pole_bound"] = std::to_string(c.pole_bound);
  return rep;
}

/// B(xi_a, omega_b) = delta_ab and every omega_b regular at the punctures.
inline IdentityReport duality_check(const BundleChart& ch) {
  detail::Timer timer;
  IdentityReport rep;
  rep.name = "duality";
  rep.window = "all frame pairs, jet order " + std::to_string(ch.jet_order());
  for (int a = 0; a < ch.m(); ++a)
    for (int b = 0; b < ch.m(); ++b)
      rep.record(ch.pair_xi(a, ch.omega()[b]) == JetScalar(a == b ? 1 : 0),
                 "pair " + std::to_string(a) + "," + std::to_string(b));
  for (int b = 0; b < ch.m(); ++b)
    for (int i = 0; i < ch.ell(); ++i)
      rep.record(ch.expand(ch.omega()[b], i, 2).valuation() >= 0,
                 "omega " + std::to_string(b) + " pole at " + std::to_string(i));
  rep.seconds = timer.seconds();
  return rep;
}

/// d_a xi_b - d_b xi_a + [xi_a, xi_b] = 0 at jet order N - 1.
inline IdentityReport flatness_check(const BundleChart& ch) {
  detail::Timer timer;
  IdentityReport rep;
  rep.name = "flatness";
  const int low = ch.jet_order() - 1;
  rep.window = "all frame pairs, jet order " + std::to_string(low);
  for (int a = 0; a < ch.m(); ++a)
    for (int b = a + 1; b < ch.m(); ++b) {
      LieSeries F = (ch.xi(b).derive(a) - ch.xi(a).derive(b) + bracket(ch.xi(a), ch.xi(b))).truncated_jets(low);
      for (int i = 0; i < ch.ell(); ++i)
        rep.record(F[i].is_zero(), std::to_string(a) + "," + std::to_string(b) + " at " + std::to_string(i));
    }
  rep.seconds = timer.seconds();
  return rep;
}

/// nabla_a of Ad(sigma^-1)(phi I_b) vanishes for random outer functions phi.
inline IdentityReport connection_stability_check(const BundleChart& ch, int samples, uint64_t seed) {
  detail::Timer timer;
  IdentityReport rep;
  rep.name = "connection_stability";
  rep.window = std::to_string(samples) + " outer sections, jet order " + std::to_string(ch.jet_order() - 1);
  const LieData& lie = ch.lie();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pb(0, lie.dim() - 1), pj(0, 8), pa(0, ch.m() - 1);
  for (int s = 0; s < samples; ++s) {
    const int b = pb(rng), j = pj(rng), a = pa(rng);
    const OuterFunction phi = ch.basis_element(OuterKind::Function, j);
    for (int i = 0; i < ch.ell(); ++i) {
      const int cert = 4 + 2 * ch.sigma_shift() + ch.xi_pole();
      MatSeries loop = phi.expansion(ch.curve(), i, cert).map([&](const Rational& r) { return lie.basis(b) * r; });
      MatSeries A = laurent_mul(laurent_mul(ch.sigma().ginv[i], loop), ch.sigma().g[i]);
      MatSeries D = A.map([a](const Mat& x) { return x.derive(a); }) +
                    laurent_mul_with(ch.xi(a)[i], A, [](const Mat& x, const Mat& y) { return commutator(x, y); });
      D = D.map([&](const Mat& x) { return x.truncated(ch.jet_order() - 1); });
      const std::string where = "b" + std::to_string(b) + " phi" + std::to_string(j) + " a" + std::to_string(a);
      if (D.certified_to() < 0) {
        ++rep.unknown;
        continue;
      }
      rep.record(D.is_zero(), where);
    }
  }
  rep.seconds = timer.seconds();
  return rep;
}

/// Kernel projections against the direct decomposition on random loops and forms (samples each).
inline IdentityReport projection_oracle_check(const KernelSet& ks, int samples, uint64_t seed) {
  detail::Timer timer;
  IdentityReport rep;
  rep.name = "projection_oracle";
  const int d = ks.dim(), N = ks.jet_order(), lo = -4, hi = 3;
  rep.window = std::to_string(samples) + " loops and forms, degrees [" + std::to_string(lo) + ", " +
               std::to_string(hi) + "], jet order " + std::to_string(N);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coef(-3, 3);
  auto random_loop = [&]() {
    LaurentVec out;
    for (int i = 0; i < ks.ell(); ++i) {
      Laurent<LieVec> L(i, -3, kExactDeg, 0, LieVec(d));
      for (int e = -3; e <= 1; ++e) {
        LieVec v(d);
        for (int p = 0; p < d; ++p) v[p] = JetScalar(Rational(coef(rng)));
        L.set(e, v);
      }
      out.push_back(L);
    }
    return out;
  };
  auto coeff = [&](const Laurent<LieVec>& L, int e) {
    if (e < L.lo() || e > L.stored_hi()) return LieVec(d);
    return L.at(e);
  };
  auto same = [&](const LieVec& a, const LieVec& b) { return (a - b).truncated(N).is_zero(); };
  for (int s = 0; s < samples; ++s) {
    const std::string tag = "sample " + std::to_string(s);
    LaurentVec a = random_loop();
    LoopDecomposition dec = decompose_loop(ks.chart(), a);
    auto minus = project_kernel(ks, Projection::MinusLoop, a, lo, hi);
    auto plus = project_kernel(ks, Projection::PlusLoop, a, lo, hi);
    LaurentVec w = random_loop();
    GlobalFormVector G = decompose_form(ks.chart(), w);
    auto fplus = project_kernel(ks, Projection::PlusForm, w, lo, hi);
    auto fminus = project_kernel(ks, Projection::MinusForm, w, lo, hi);
    for (int i = 0; i < ks.ell(); ++i) {
      Laurent<LieVec> V = loop_v_part(ks.chart(), dec, i, hi);
      Laurent<LieVec> P = ks.chart().expand(G, i, hi);
      for (int e = lo; e <= hi; ++e) {
        const size_t k = static_cast<size_t>(e - lo);
        const std::string where = tag + " at " + std::to_string(i) + "," + std::to_string(e);
        if (!minus[i][k] || !plus[i][k] || !fplus[i][k] || !fminus[i][k]) {
          ++rep.unknown;
          continue;
        }
        rep.record(same(*minus[i][k], coeff(V, e)), where + " loop minus");
        rep.record(same(*plus[i][k] + *minus[i][k], coeff(a[i], e)), where + " loop sum");
        if (e < 0) rep.record(plus[i][k]->truncated(N).is_zero(), where + " loop plus pole");
        rep.record(same(*fplus[i][k], coeff(P, e)), where + " form plus");
        rep.record(same(*fplus[i][k] + *fminus[i][k], coeff(w[i], e)), where + " form sum");
      }
    }
  }
  rep.seconds = timer.seconds();
  return rep;
}

/// Solved columns r_{j,k,a} have the prescribed principal part and pair to zero with every xi.
inline IdentityReport kernel_columns_check(const KernelSet& ks, int kmax) {
  detail::Timer timer;
  IdentityReport rep;
  rep.name = "kernel_columns";
  rep.window = "columns k <= " + std::to_string(kmax) + ", principal parts at every puncture";
  const int d = ks.dim(), N = ks.jet_order();
  for (int j = 0; j < ks.ell(); ++j)
    for (int k = 0; k <= kmax; ++k)
      for (int a = 0; a < d; ++a) {
        const std::string tag = "column " + std::to_string(j) + "," + std::to_string(k) + "," + std::to_string(a);
        RColumn col = ks.column(j, k, a);
        for (int beta = 0; beta < ks.m(); ++beta)
          rep.record(ks.chart().pair_xi(beta, col.G).is_zero(), tag + " xi" + std::to_string(beta));
        for (int i = 0; i < ks.ell(); ++i) {
          Laurent<LieVec> L = ks.column_series(j, k, a, i, 0);
          for (int e = std::min(L.lo(), -k - 1); e < 0; ++e) {
            LieVec want = (i == j && e == -k - 1) ? ks.lie().dual_coords(a) : LieVec(d);
            LieVec got = (e < L.lo() || e > L.stored_hi()) ? LieVec(d) : L.at(e);
            rep.record((got - want).truncated(N).is_zero(), tag + " at " + std::to_string(i) + "," + std::to_string(e));
          }
        }
      }
  rep.seconds = timer.seconds();
  return rep;
}

}  // namespace dynr
