#pragma once
// Change of quasi-section sigma' = g_- sigma g_+: full recomputation against the transformation rules.

#include "dynr/yangbaxter.hpp"

namespace dynr {

/// 1 + coeff (u_var) w E_{row,col}; w = z^power at `puncture` for g_+, w = x^power at every puncture for g_-.
/// u_var < 0 means no u factor.
struct GaugeFactor {
  int puncture = 0, row = 0, col = 1, power = 0, u_var = -1;
  Rational coeff = 1;
};

struct GaugeSpec {
  std::string name;
  std::vector<GaugeFactor> plus, minus;
};

namespace detail {

inline GroupElement gauge_group(const BundleChart& ch, const std::vector<GaugeFactor>& fs, bool outer, int order) {
  const int n = ch.lie().n(), ell = ch.ell(), m = ch.m();
  GroupElement g = GroupElement::identity(n, ell);
  for (auto& f : fs) {
    if (f.row == f.col || f.row < 0 || f.col < 0 || f.row >= n || f.col >= n || f.u_var >= m)
      throw Error(ErrorCode::NotInnerOuter, "bad gauge factor");
    if (f.power < 0) throw Error(ErrorCode::NotInnerOuter, "gauge factor with negative power");
    if (!outer && (f.puncture < 0 || f.puncture >= ell)) throw Error(ErrorCode::NotInnerOuter, "bad puncture");
    JetScalar c = JetScalar(f.coeff);
    if (f.u_var >= 0) c = JetScalar::variable(f.u_var, m, order) * c;
    const Mat E = Mat::unit(n, f.row, f.col, c);
    GroupElement e = GroupElement::identity(n, ell);
    for (int i = 0; i < ell; ++i) {
      if (!outer && i != f.puncture) continue;
      // E is nilpotent, so 1 + wE has inverse 1 - wE.
      MatSeries X = outer ? CurveModel::poly_at(Poly::monomial(f.power), ch.curve().x_expansion(i), 0)
                                .map([&](const Rational& v) { return E * v; })
                          : MatSeries::monomial(i, f.power, E);
      e.g[i] = (e.g[i] + X).normalized();
      e.ginv[i] = (e.ginv[i] - X).normalized();
    }
    g = g * e;
  }
  for (int i = 0; i < ell; ++i) {
    g.g[i] = g.g[i].normalized();
    g.ginv[i] = g.ginv[i].normalized();
  }
  return g;
}

/// h^-1 d_alpha h as coordinates per puncture.
inline LaurentVec log_derivative(const LieData& lie, const GroupElement& h, int alpha, int order) {
  LaurentVec out;
  for (int i = 0; i < h.punctures(); ++i) {
    MatSeries d = h.g[i].map([alpha](const Mat& x) { return x.derive(alpha); });
    MatSeries v = laurent_mul(h.ginv[i], d).map([order](const Mat& x) { return x.truncated(order); });
    out.push_back(v.map([&](const Mat& x) { return lie.coords(x); }).normalized());
  }
  return out;
}

/// Ad(h^-1) a = h^-1 a h in coordinates.
inline LaurentVec ad_inverse(const LieData& lie, const GroupElement& h, const LaurentVec& a) {
  LaurentVec out;
  for (int i = 0; i < h.punctures(); ++i) {
    MatSeries A = a[i].map([&](const LieVec& v) { return lie.matrix(v); });
    MatSeries c = laurent_mul(laurent_mul(h.ginv[i], A), h.g[i]);
    out.push_back(c.map([&](const Mat& x) { return lie.coords(x); }).normalized());
  }
  return out;
}

/// Matrices M_k (columns = basis images) with Ad(h^-1) = sum_k M_k z^k at each puncture.
inline std::vector<std::vector<Ten2>> ad_inverse_matrices(const LieData& lie, const GroupElement& h) {
  const int d = lie.dim(), ell = h.punctures();
  std::vector<std::vector<Ten2>> out(ell);
  for (int b = 0; b < d; ++b) {
    LaurentVec unit;
    for (int i = 0; i < ell; ++i) unit.push_back(Laurent<LieVec>::monomial(i, 0, lie.unit(b)));
    LaurentVec img = ad_inverse(lie, h, unit);
    for (int i = 0; i < ell; ++i) {
      if (img[i].lo() < 0) throw Error(ErrorCode::NotInnerOuter, "g_+ has poles");
      for (int k = 0; k <= img[i].stored_hi(); ++k) {
        if (static_cast<int>(out[i].size()) <= k) out[i].resize(k + 1, Ten2(d));
        const LieVec& v = img[i].at(k);
        for (int p = 0; p < d; ++p) out[i][k](p, b) = v[p];
      }
    }
  }
  return out;
}

inline Ten2 conjugate_ten2(const Ten2& M, const Ten2& A, const Ten2& N) {
  const int d = A.d;
  Ten2 MA(d), out(d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      for (int s = 0; s < d; ++s)
        if (!M(p, s).is_zero() && !A(s, q).is_zero()) MA(p, q) += M(p, s) * A(s, q);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      for (int s = 0; s < d; ++s)
        if (!MA(p, s).is_zero() && !N(q, s).is_zero()) out(p, q) += MA(p, s) * N(q, s);
  return out;
}

}  // namespace detail

/// (Ad(h^-1) (x) Ad(h^-1)) A for h without poles; the degree bounds of A are preserved.
inline Series2 ad_inverse_both(const LieData& lie, const GroupElement& h, const Series2& A) {
  auto M = std::make_shared<std::vector<std::vector<Ten2>>>(detail::ad_inverse_matrices(lie, h));
  return Series2(
      A.ell(), A.dim(), [A](int i, int j, int f) { return A.xlo(i, j, f); },
      [A](int i, int j, int e) { return A.ylo(i, j, e); },
      [A, M](int i, int j, int e, int f) -> Opt2 {
        Ten2 acc(A.dim());
        const auto &Mi = (*M)[i], &Mj = (*M)[j];
        for (int k = 0; k < static_cast<int>(Mi.size()); ++k)
          for (int l = 0; l < static_cast<int>(Mj.size()); ++l) {
            Opt2 a = A.at(i, j, e - k, f - l);
            if (!a) return std::nullopt;
            if (!a->is_zero()) acc += detail::conjugate_ten2(Mi[k], *a, Mj[l]);
          }
        return acc;
      });
}

/// Ad(h^-1) applied to a g-valued series (h without poles).
inline Series1 ad_inverse_series(const LieData& lie, const GroupElement& h, const Series1& w) {
  auto M = std::make_shared<std::vector<std::vector<Ten2>>>(detail::ad_inverse_matrices(lie, h));
  Series1 s = w;
  s.hi = [w, M](int i) { return sat_add(w.hi(i), static_cast<int>((*M)[i].size())); };
  s.coeff = [w, M](int i, int e) -> Opt1 {
    LieVec acc(w.d);
    const auto& Mi = (*M)[i];
    for (int k = 0; k < static_cast<int>(Mi.size()); ++k) {
      Opt1 a = w.at(i, e - k);
      if (!a) return std::nullopt;
      for (int p = 0; p < w.d; ++p)
        for (int q = 0; q < w.d; ++q)
          if (!Mi[k](p, q).is_zero() && !(*a)[q].is_zero()) acc[p] += Mi[k](p, q) * (*a)[q];
    }
    return acc;
  };
  return s;
}

struct GaugeResult {
  std::shared_ptr<BundleChart> chart;
  std::shared_ptr<KernelSet> kernels;
  std::vector<IdentityReport> relations;  // xi, omega, t, r, rho
  IdentityReport summary;
};

/// Recomputes chart and kernels for sigma' = g_- sigma g_+ and compares them with the transformation
/// rules on the window e in [-K-1, K], f in [0, K] (first-slot degrees up to K+certExtra for one-slot objects).
inline GaugeResult gauge_transform(const KernelSet& ks, const GaugeSpec& spec) {
  detail::Timer timer;
  const BundleChart& ch = ks.chart();
  const LieData& lie = ks.lie();
  const int N = ch.jet_order(), m = ch.m(), ell = ch.ell(), d = ks.dim(), K = ks.K();
  const GroupElement gp = detail::gauge_group(ch, spec.plus, false, N + 1);
  const GroupElement gm = detail::gauge_group(ch, spec.minus, true, N + 1);

  GaugeResult out;
  out.chart = build_chart_from_sigma(ch.curve(), lie, (gm * ch.sigma_hi() * gp).truncated_jets(N + 1), N);
  out.kernels = std::make_shared<KernelSet>(out.chart, K, 2, ks.column_cap());
  const KernelSet& kp = *out.kernels;

  // Y_a = Ad(sigma^-1)(g_-^-1 d_a g_-), Z_a = g_+^-1 d_a g_+.
  std::vector<LaurentVec> Y, Z;
  for (int a = 0; a < m; ++a) {
    Y.push_back(detail::ad_inverse(lie, ch.sigma_hi(), detail::log_derivative(lie, gm, a, N)));
    Z.push_back(detail::log_derivative(lie, gp, a, N));
  }

  // xi' = Ad(g_+^-1)(xi + Y) + Z.
  IdentityReport rx;
  rx.name = "gauge_xi";
  for (int a = 0; a < m; ++a) {
    LaurentVec xi;
    for (int i = 0; i < ell; ++i) xi.push_back(ch.xi_coords(a, i));
    LaurentVec want = add(detail::ad_inverse(lie, gp, add(xi, Y[a])), Z[a]);
    for (int i = 0; i < ell; ++i) {
      const auto& got = out.chart->xi_coords(a, i);
      const int lo = std::min(got.lo(), want[i].lo()), hi = std::max(got.stored_hi(), want[i].stored_hi());
      for (int e = lo; e <= hi; ++e) {
        LieVec diff = (got.at(e) - want[i].at(e)).truncated(N);
        rx.record(diff.is_zero(), "(" + std::to_string(a) + ";" + std::to_string(i) + "," + std::to_string(e) + ")");
      }
    }
  }
  rx.window = "all stored degrees";

  const int order = N;
  const int oneHi = K + 4;
  // omega' = Ad(g_+^-1) omega.
  IdentityReport ro;
  ro.name = "gauge_omega";
  ro.window = "e in [lo," + std::to_string(oneHi) + "]";
  for (int a = 0; a < m; ++a) {
    Series1 want = ad_inverse_series(lie, gp, ks.omega(a));
    const Series1& got = kp.omega(a);
    for (int i = 0; i < ell; ++i)
      for (int e = std::min(got.lo(i), want.lo(i)); e <= oneHi; ++e) {
        Opt1 x = got.at(i, e), y = want.at(i, e);
        if (!x || !y) {
          ++ro.unknown;
          continue;
        }
        ro.record((*x - *y).truncated(order).is_zero(),
                  "(" + std::to_string(a) + ";" + std::to_string(i) + "," + std::to_string(e) + ")");
      }
  }

  Series2 sumOmegaY = zero2(ell, d), sumOmegaZ = zero2(ell, d);
  for (int a = 0; a < m; ++a) {
    sumOmegaY = sumOmegaY + outer(ks.omega(a), series1_of(Y[a], d, kExactDeg));
    sumOmegaZ = sumOmegaZ + outer(ad_inverse_series(lie, gp, ks.omega(a)), series1_of(Z[a], d, kExactDeg));
  }
  Series2 tWant = ad_inverse_both(lie, gp, ks.t() + sumOmegaY) + sumOmegaZ;
  Series2 rWant = ad_inverse_both(lie, gp, ks.r()) - sumOmegaZ;
  Series2 rhoWant = ad_inverse_both(lie, gp, ks.rho() + sumOmegaY);
  Series2 rhoPrinted = ad_inverse_both(lie, gp, ks.rho() - sumOmegaY);

  kp.ensure_columns(std::min(kp.column_cap(), 2 * K + 1));
  ks.ensure_columns(std::min(ks.column_cap(), 2 * K + 1));
  IdentityReport rt = check_zero2("gauge_t", kp.t() - tWant, -K - 1, K, 0, K, order);
  IdentityReport rr = check_zero2("gauge_r", kp.r() - rWant, -K - 1, K, 0, K, order);
  IdentityReport rp = check_zero2("gauge_rho", kp.rho() - rhoWant, -K - 1, K, 0, K, order);
  IdentityReport rpPrinted = check_zero2("gauge_rho_opposite_sign", kp.rho() - rhoPrinted, -K - 1, K, 0, K, order);
  rp.details["opposite_sign_nonzero"] = std::to_string(rpPrinted.nonzero);
  rp.details["sign"] = "rho' = (Ad(g+^-1) x Ad(g+^-1))(rho + sum omega x Ad(sigma^-1)(g-^-1 d g-))";

  out.relations = {rx, ro, rt, rr, rp};
  out.summary.name = "gauge_covariance" + (spec.name.empty() ? std::string() : ":" + spec.name);
  out.summary.window = "e in [" + std::to_string(-K - 1) + "," + std::to_string(K) + "], f in [0," +
                       std::to_string(K) + "]";
  for (auto& r : out.relations) {
    out.summary.merge(r);
    out.summary.details[r.name] = std::string(status_name(r.status())) + " checked=" + std::to_string(r.checked) +
                                  " nonzero=" + std::to_string(r.nonzero) + " unknown=" + std::to_string(r.unknown);
  }
  out.summary.details["rho_opposite_sign_nonzero"] = std::to_string(rpPrinted.nonzero);
  out.summary.seconds = timer.seconds();
  return out;
}

/// The two nontrivial transformations used by default: a u-dependent inner and outer pair, and a constant
/// unipotent inner factor combined with a higher outer one.
inline std::vector<GaugeSpec> default_gauge_specs(int ell) {
  GaugeSpec a{"inner_u1_z_outer_u2_x", {{0, 0, 1, 1, 0, Rational(1)}}, {{0, 1, 0, 1, 1, Rational(1)}}};
  GaugeSpec b{"inner_const_outer_x2",
              {{ell - 1, 1, 0, 0, -1, Rational(1, 2)}, {0, 0, 1, 2, 2, Rational(-3)}},
              {{0, 0, 1, 2, 2, Rational(2)}}};
  return {a, b};
}

}  // namespace dynr
