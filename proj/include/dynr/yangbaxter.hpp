#pragma once
// Kernel identities checked as exact zero residuals on certified windows.

#include <chrono>
#include <future>
#include <sstream>

#include "dynr/kernels.hpp"

namespace dynr {

enum class Status { Pass, Fail, Inconclusive };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Inconclusive: return "FAIL-INCONCLUSIVE";
  }
  return "?";
}

struct IdentityReport {
  std::string name;
  std::string window;
  long checked = 0;   // window points with every contribution known
  long unknown = 0;   // requested points dropped for missing data
  long nonzero = 0;   // checked points with a nonzero residual
  std::vector<std::string> samples;  // first few nonzero entries
  std::map<std::string, std::string> details;
  double seconds = 0;

  Status status() const {
    if (nonzero > 0) return Status::Fail;
    if (checked == 0) return Status::Inconclusive;
    return Status::Pass;
  }
  void record(bool zero, const std::string& where) {
    ++checked;
    if (zero) return;
    ++nonzero;
    if (samples.size() < 8) samples.push_back(where);
  }
  void merge(const IdentityReport& o) {
    checked += o.checked;
    unknown += o.unknown;
    nonzero += o.nonzero;
    for (auto& s : o.samples)
      if (samples.size() < 8) samples.push_back(s);
  }
};

namespace detail {

inline std::string ten3_first_nonzero(const Ten3& t) {
  for (int p = 0; p < t.d; ++p)
    for (int q = 0; q < t.d; ++q)
      for (int r = 0; r < t.d; ++r)
        if (!t(p, q, r).is_zero())
          return "[" + std::to_string(p) + "," + std::to_string(q) + "," + std::to_string(r) + "]=" + t(p, q, r).str();
  return "";
}
inline std::string ten2_first_nonzero(const Ten2& t) {
  for (int p = 0; p < t.d; ++p)
    for (int q = 0; q < t.d; ++q)
      if (!t(p, q).is_zero()) return "[" + std::to_string(p) + "," + std::to_string(q) + "]=" + t(p, q).str();
  return "";
}

class Timer {
 public:
  Timer() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

/// Three-variable window: x-degree a, y-degree b, z-degree c on every puncture triple.
struct Window3 {
  std::vector<std::array<int, 3>> degrees;
  std::string desc;
};

/// a in [amin, amax], b in [bmin, ...], c >= 0 with b + c <= K - 1 (b >= 0) or b in [bmin, -1], c <= K - 1.
inline Window3 dcybe_window(int K, int amin, int amax) {
  Window3 w;
  for (int b = 0; b <= K - 1; ++b)
    for (int c = 0; b + c <= K - 1; ++c)
      for (int a = amin; a <= amax; ++a) w.degrees.push_back({a, b, c});
  w.desc = "a in [" + std::to_string(amin) + "," + std::to_string(amax) + "], b,c >= 0, b+c <= " +
           std::to_string(K - 1);
  return w;
}
/// Strip with negative y-degree, where the left-hand side must vanish on its own.
inline Window3 y_pole_window(int K) {
  Window3 w;
  for (int b = -K - 1; b <= -1; ++b)
    for (int c = 0; c <= K - 1; ++c)
      for (int a = 0; a <= K; ++a) w.degrees.push_back({a, b, c});
  w.desc = "a in [0," + std::to_string(K) + "], b in [" + std::to_string(-K - 1) + ",-1], c in [0," +
           std::to_string(K - 1) + "]";
  return w;
}

/// Evaluates T on the window for all puncture triples, in parallel over triples; entries are compared
/// after truncating jets to `order`.
inline IdentityReport check_zero3(const std::string& name, const Series3& T, const Window3& w, int order) {
  detail::Timer timer;
  IdentityReport rep;
  rep.name = name;
  rep.window = w.desc;
  const int ell = T.ell;
  std::vector<std::future<IdentityReport>> jobs;
  for (int i = 0; i < ell; ++i)
    for (int j = 0; j < ell; ++j)
      for (int k = 0; k < ell; ++k)
        jobs.push_back(std::async(std::launch::async, [&, i, j, k] {
          IdentityReport part;
          for (auto& deg : w.degrees) {
            Opt3 v = T.at(i, j, k, deg[0], deg[1], deg[2]);
            if (!v) {
              ++part.unknown;
              continue;
            }
            Ten3 z = v->map([order](const JetScalar& x) { return x.truncated(order); });
            std::ostringstream where;
            if (!z.is_zero())
              where << "(" << i << j << k << ";" << deg[0] << "," << deg[1] << "," << deg[2] << ")"
                    << detail::ten3_first_nonzero(z);
            part.record(z.is_zero(), where.str());
          }
          return part;
        }));
  for (auto& f : jobs) rep.merge(f.get());
  rep.seconds = timer.seconds();
  return rep;
}

/// Two-variable window e in [emin, emax], f in [fmin, fmax].
inline IdentityReport check_zero2(const std::string& name, const Series2& T, int emin, int emax, int fmin, int fmax,
                                  int order) {
  detail::Timer timer;
  IdentityReport rep;
  rep.name = name;
  rep.window = "e in [" + std::to_string(emin) + "," + std::to_string(emax) + "], f in [" + std::to_string(fmin) +
               "," + std::to_string(fmax) + "]";
  for (int i = 0; i < T.ell(); ++i)
    for (int j = 0; j < T.ell(); ++j)
      for (int e = emin; e <= emax; ++e)
        for (int f = fmin; f <= fmax; ++f) {
          Opt2 v = T.at(i, j, e, f);
          if (!v) {
            ++rep.unknown;
            continue;
          }
          Ten2 z = v->map([order](const JetScalar& x) { return x.truncated(order); });
          std::ostringstream where;
          if (!z.is_zero()) where << "(" << i << j << ";" << e << "," << f << ")" << detail::ten2_first_nonzero(z);
          rep.record(z.is_zero(), where.str());
        }
  rep.seconds = timer.seconds();
  return rep;
}

// ---- Series builders ----

inline Series1 derive(const Series1& w, int alpha) {
  Series1 out = w;
  auto c = w.coeff;
  out.coeff = [c, alpha](int i, int e) -> Opt1 {
    Opt1 v = c(i, e);
    if (!v) return std::nullopt;
    return v->derive(alpha);
  };
  return out;
}
inline Series2 derive(const Series2& A, int alpha) {
  return map_jets(A, [alpha](const JetScalar& x) { return x.derive(alpha); });
}
inline Series2 scaled(const Series2& A, const Rational& s) {
  const JetScalar c(s);
  return map_jets(A, [c](const JetScalar& x) { return x * c; });
}
inline Series2 zero2(int ell, int d) {
  auto z = [](int, int, int) { return 0; };
  return Series2(ell, d, z, z, [d](int, int, int, int) -> Opt2 { return Ten2(d); });
}
inline Series3 zero3(int ell, int d) {
  return {ell, d, [d](int, int, int, int, int, int) -> Opt3 { return Ten3(d); }};
}

/// [Abar^{12}, A^{13}] + [A^{12}, A^{23}] + [A^{13}, A^{23}].
inline Series3 cybe_lhs(const LieData& lie, const Series2& Abar, const Series2& A) {
  return bracket_12_13(lie, Abar, A) + bracket_12_23(lie, A, A) + bracket_13_23(lie, A, A);
}
/// sum_alpha omega_alpha^{(1)} D_alpha A^{(23)} - omega_alpha^{(2)} D_alpha A^{(13)} for given D_alpha A.
inline Series3 dynamical_term(const KernelSet& ks, const std::vector<Series2>& DA) {
  Series3 out = zero3(ks.ell(), ks.dim());
  for (int al = 0; al < ks.m(); ++al)
    out = out + outer_1_23(ks.omega(al), DA[al]) - outer_2_13(ks.omega(al), DA[al]);
  return out;
}
/// nabla_alpha A = d_alpha A + (ad xi_alpha (x) 1 + 1 (x) ad xi_alpha) A.
inline Series2 nabla(const KernelSet& ks, const Series2& A, int alpha) {
  return derive(A, alpha) + ad_slot(ks.lie(), ks.xi(alpha), A, true) + ad_slot(ks.lie(), ks.xi(alpha), A, false);
}

inline std::vector<Series2> partials(const KernelSet& ks, const Series2& A) {
  std::vector<Series2> out;
  for (int al = 0; al < ks.m(); ++al) out.push_back(derive(A, al));
  return out;
}
inline std::vector<Series2> nablas(const KernelSet& ks, const Series2& A) {
  std::vector<Series2> out;
  for (int al = 0; al < ks.m(); ++al) out.push_back(nabla(ks, A, al));
  return out;
}

/// Columns needed for the DCYBE window at depth K.
inline int dcybe_columns(int K) { return 2 * K + 1; }

// ---- Identities ----

/// Dynamical CYBE for r. With omitDynamical the right-hand side is dropped (negative control).
inline IdentityReport dcybe_residual(const KernelSet& ks, bool omitDynamical = false) {
  const int K = ks.K(), order = ks.jet_order() - 1;
  ks.ensure_columns(std::min(ks.column_cap(), dcybe_columns(K)));
  Series3 lhs = cybe_lhs(ks.lie(), ks.rbar(), ks.r());
  Series3 res = omitDynamical ? lhs : lhs - dynamical_term(ks, partials(ks, ks.r()));
  IdentityReport rep = check_zero3(omitDynamical ? "dcybe_negative_control" : "dcybe", res,
                                   dcybe_window(K, -K - 1, K), order);
  if (!omitDynamical) {
    IdentityReport pole = check_zero3("dcybe_y_poles", lhs, y_pole_window(K), order);
    rep.details["y_pole_strip"] = pole.window + ": " + std::to_string(pole.checked) + " checked, " +
                                  std::to_string(pole.nonzero) + " nonzero";
    rep.merge(pole);
    rep.seconds += pole.seconds;
  }
  return rep;
}

/// Dynamical CYBE for rho with the covariant derivatives nabla.
inline IdentityReport extended_dcybe_residual(const KernelSet& ks) {
  const int K = ks.K(), order = ks.jet_order() - 1;
  ks.ensure_columns(std::min(ks.column_cap(), dcybe_columns(K)));
  Series3 res = cybe_lhs(ks.lie(), ks.rhobar(), ks.rho()) - dynamical_term(ks, nablas(ks, ks.rho()));
  return check_zero3("extended_dcybe", res, dcybe_window(K, -K - 1, K), order);
}

/// rho-residual minus r-residual equals the t-bookkeeping: the difference of both sides' t-terms.
inline IdentityReport extended_minus_plain(const KernelSet& ks) {
  const int K = ks.K(), order = ks.jet_order() - 1;
  const LieData& lie = ks.lie();
  Series3 resRho = cybe_lhs(lie, ks.rhobar(), ks.rho()) - dynamical_term(ks, nablas(ks, ks.rho()));
  Series3 resR = cybe_lhs(lie, ks.rbar(), ks.r()) - dynamical_term(ks, partials(ks, ks.r()));
  // Expand the products bilinearly: everything not in the r-residual.
  const Series2 tbar = ks.rhobar() - ks.rbar();
  Series3 extra = bracket_12_13(lie, ks.rbar(), ks.t()) + bracket_12_13(lie, tbar, ks.rho()) +
                  bracket_12_23(lie, ks.r(), ks.t()) + bracket_12_23(lie, ks.t(), ks.rho()) +
                  bracket_13_23(lie, ks.r(), ks.t()) + bracket_13_23(lie, ks.t(), ks.rho());
  std::vector<Series2> dExtra;
  for (int al = 0; al < ks.m(); ++al) dExtra.push_back(nabla(ks, ks.rho(), al) - derive(ks.r(), al));
  Series3 diff = resRho - resR - (extra - dynamical_term(ks, dExtra));
  return check_zero3("extended_minus_plain", diff, dcybe_window(K, -K - 1, K), order);
}

/// [rbar, omega_alpha (x) 1] + [r, 1 (x) omega_alpha] = sum_beta omega_beta (x) d_beta omega_alpha -
/// d_beta omega_alpha (x) omega_beta, per alpha.
inline IdentityReport auxiliary_identity(const KernelSet& ks) {
  const int K = ks.K(), order = ks.jet_order() - 1;
  const LieData& lie = ks.lie();
  ks.ensure_columns(std::min(ks.column_cap(), dcybe_columns(K)));
  IdentityReport rep;
  rep.name = "auxiliary_identity";
  double secs = 0;
  for (int al = 0; al < ks.m(); ++al) {
    // [A, w (x) 1] = -[w (x) 1, A]
    Series2 lhs = ad_slot(lie, ks.omega(al), ks.rbar(), true) + ad_slot(lie, ks.omega(al), ks.r(), false);
    Series2 rhs;
    for (int be = 0; be < ks.m(); ++be) {
      Series1 dw = derive(ks.omega(al), be);
      Series2 term = outer(ks.omega(be), dw) - outer(dw, ks.omega(be));
      rhs = be == 0 ? term : rhs + term;
    }
    IdentityReport part = check_zero2("", scaled(lhs, Rational(-1)) - rhs, -K - 1, K, -K - 1, K, order);
    IdentityReport poles = check_zero2("", lhs, -K - 1, -1, -K - 1, K, order);
    IdentityReport ypoles = check_zero2("", lhs, 0, K, -K - 1, -1, order);
    rep.window = part.window;
    rep.merge(part);
    rep.merge(poles);
    rep.merge(ypoles);
    secs += part.seconds + poles.seconds + ypoles.seconds;
  }
  rep.details["pole_free"] = "lhs vanishes at negative x- and y-degrees";
  rep.seconds = secs;
  return rep;
}

/// Pairing of a three-tensor with a (x) b (x) c.
inline JetScalar pair3(const LieData& lie, const Ten3& T, const LieVec& a, const LieVec& b, const LieVec& c) {
  const int d = lie.dim();
  auto lower = [&](const LieVec& v) {
    LieVec w(d);
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q)
        if (!v[p].is_zero() && sgn(lie.gram(p, q)) != 0) w[q] += v[p] * JetScalar(lie.gram(p, q));
    return w;
  };
  const LieVec A = lower(a), B = lower(b), C = lower(c);
  JetScalar s;
  for (int p = 0; p < d; ++p) {
    if (A[p].is_zero()) continue;
    for (int q = 0; q < d; ++q) {
      if (B[q].is_zero()) continue;
      const JetScalar ab = A[p] * B[q];
      for (int r = 0; r < d; ++r)
        if (!C[r].is_zero() && !T(p, q, r).is_zero()) s += ab * C[r] * T(p, q, r);
    }
  }
  return s;
}

/// B(x, y) for g-valued series given per puncture. Throws WindowTooSmall unless the unknown tails of
/// x and y meet only known zeros of the other.
inline JetScalar pair_series(const LieData& lie, const LaurentVec& x, const LaurentVec& y) {
  JetScalar s;
  for (size_t i = 0; i < x.size(); ++i) {
    const int vx = std::min(x[i].valuation(), x[i].certified_to() + 1);
    const int vy = std::min(y[i].valuation(), y[i].certified_to() + 1);
    if (sat_add(x[i].certified_to(), vy) < -1 || sat_add(y[i].certified_to(), vx) < -1)
      throw Error(ErrorCode::WindowTooSmall, "pairing window");
    auto [lo, hi] = support(x[i]);
    for (int e = lo; e <= hi; ++e) {
      const int f = -1 - e;
      if (f < y[i].lo() || f > y[i].stored_hi()) continue;
      s += lie.kappa(x[i].at(e), y[i].at(f));
    }
  }
  return s;
}

/// The V elements used as probes: xi_beta and Ad(sigma^-1)(I_b phi) with pole(phi) <= depth.
struct Probe {
  std::string label;
  LaurentVec series;  // certified through `cert`
  int pole = 0;
  bool is_xi = false;
  int index = 0;      // xi index, or function-basis index * d + b
};

inline std::vector<Probe> v_probes(const BundleChart& ch, int depth, int cert) {
  std::vector<Probe> out;
  for (int al = 0; al < ch.m(); ++al) {
    Probe p;
    p.label = "xi" + std::to_string(al);
    p.is_xi = true;
    p.index = al;
    for (int i = 0; i < ch.ell(); ++i) p.series.push_back(ch.xi_coords(al, i).truncated(cert));
    p.pole = ch.xi_pole();
    out.push_back(p);
  }
  const int nf = ch.basis_count(OuterKind::Function, depth);
  for (int j = 0; j < nf; ++j)
    for (int b = 0; b < ch.dim(); ++b) {
      Probe p;
      p.label = "phi" + std::to_string(j) + "I" + std::to_string(b);
      p.index = j * ch.dim() + b;
      p.pole = 0;
      for (int i = 0; i < ch.ell(); ++i) {
        p.series.push_back(ch.conj_expansion(OuterKind::Function, i, j, b, cert));
        p.pole = std::max(p.pole, -std::min(0, p.series.back().valuation()));
      }
      out.push_back(p);
    }
  return out;
}

/// Bracket of two loops given per puncture, certified through cert.
inline LaurentVec bracket_series(const LieData& lie, const LaurentVec& a, const LaurentVec& b, int cert) {
  LaurentVec out;
  for (size_t i = 0; i < a.size(); ++i)
    out.push_back(laurent_mul_with(a[i], b[i], [&](const LieVec& x, const LieVec& y) { return lie.bracket(x, y); })
                      .truncated(cert));
  return out;
}

/// Weak form of both sides of the DCYBE: B(a (x) b (x) c, side) = B([a, b], c) for a, b probes of V and
/// c a column of r.
inline IdentityReport weak_phi_psi(const KernelSet& ks, int testDepth, int maxColumn) {
  detail::Timer timer;
  const BundleChart& ch = ks.chart();
  const LieData& lie = ks.lie();
  const int order = ks.jet_order() - 1;
  std::vector<Probe> probes = v_probes(ch, testDepth, 0);
  int pmax = 0;
  for (auto& p : probes) pmax = std::max(pmax, p.pole);
  ks.ensure_columns(std::min(ks.column_cap(), 2 * pmax + maxColumn + 2));
  const Series3 lhsS = cybe_lhs(lie, ks.rbar(), ks.r());
  const Series3 rhsS = dynamical_term(ks, partials(ks, ks.r()));
  std::map<std::array<int, 6>, std::pair<Opt3, Opt3>> memo;
  auto sides = [&](int i, int j, int k, int e, int f, int g) -> const std::pair<Opt3, Opt3>& {
    const std::array<int, 6> key{i, j, k, e, f, g};
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, std::make_pair(lhsS.at(i, j, k, e, f, g), rhsS.at(i, j, k, e, f, g))).first;
    return it->second;
  };
  IdentityReport rep;
  rep.name = "weak_phi_psi";
  rep.window = "probes pole <= " + std::to_string(testDepth) + ", columns k <= " + std::to_string(maxColumn);
  // Probe expansions certified far enough to pair against the column poles.
  const int cert = 2 * pmax + maxColumn + 2;
  probes = v_probes(ch, testDepth, cert);
  for (size_t pa = 0; pa < probes.size(); ++pa)
    for (size_t pb = pa; pb < probes.size(); ++pb) {
      const Probe& A = probes[pa];
      const Probe& Bp = probes[pb];
      LaurentVec ab = bracket_series(lie, A.series, Bp.series, cert);
      for (int kc = 0; kc <= maxColumn; ++kc)
        for (int jc = 0; jc < ks.ell(); ++jc)
          for (int ac = 0; ac < ks.dim(); ++ac) {
            LaurentVec c;
            for (int i = 0; i < ks.ell(); ++i) c.push_back(ks.column_series(jc, kc, ac, i, A.pole + Bp.pole + 1));
            const JetScalar want = pair_series(lie, ab, c).truncated(order);
            // The three-tensors are pole-free in x, y and polynomial-bounded in z by the column degree.
            bool known = true;
            JetScalar gotL, gotR;
            for (int i = 0; i < ks.ell() && known; ++i)
              for (int j = 0; j < ks.ell() && known; ++j)
                for (int e = 0; e < A.pole && known; ++e)
                  for (int f = 0; f < Bp.pole && known; ++f) {
                    const LieVec& av = A.series[i].at(-1 - e);
                    const LieVec& bv = Bp.series[j].at(-1 - f);
                    if (av.is_zero() || bv.is_zero()) continue;
                    const int g = kc;  // c's only principal part is at degree -kc - 1 on puncture jc
                    const auto& [L, R] = sides(i, j, jc, e, f, g);
                    if (!L || !R) {
                      known = false;
                      break;
                    }
                    const LieVec cv = lie.dual_coords(ac);
                    gotL += pair3(lie, *L, av, bv, cv);
                    gotR += pair3(lie, *R, av, bv, cv);
                  }
            if (!known) {
              ++rep.unknown;
              continue;
            }
            const std::string where = A.label + "," + Bp.label + ",r" + std::to_string(jc) + std::to_string(kc) +
                                      std::to_string(ac);
            rep.record((gotL.truncated(order) - want).is_zero(), "lhs " + where);
            rep.record((gotR.truncated(order) - want).is_zero(), "rhs " + where);
          }
    }
  rep.details["pole_free"] = "pairing uses nonnegative x- and y-degrees; poles are checked by dcybe";
  rep.seconds = timer.seconds();
  return rep;
}

/// Szego properties of rho: globality in each slot, and the diagonal residue equal to gamma.
inline IdentityReport szego_check(const KernelSet& ks, int testDepth) {
  detail::Timer timer;
  const BundleChart& ch = ks.chart();
  const LieData& lie = ks.lie();
  const int K = ks.K(), N = ks.jet_order(), d = ks.dim();
  IdentityReport rep;
  rep.name = "szego";
  rep.window = "x,y degrees in [" + std::to_string(-K - 1) + "," + std::to_string(K) + "], probes pole <= " +
               std::to_string(testDepth);
  ks.ensure_columns(std::min(ks.column_cap(), 2 * K + testDepth + ch.sigma_shift() + 2));
  // Second slot: in the opposite expansion rho = -tau rhobar(y, x), so the x-series of rhobar lie in
  // Ad(sigma^-1) L^- g and pair to zero with Ad(sigma^-1) K^- g.
  const int nforms = ch.basis_count(OuterKind::Form, testDepth);
  for (int j = 0; j < nforms; ++j)
    for (int b = 0; b < d; ++b) {
      LaurentVec w;
      for (int i = 0; i < ks.ell(); ++i) w.push_back(ch.conj_expansion(OuterKind::Form, i, j, b, K + 1));
      auto got = pair_first(lie, ks.rhobar(), w, 0, K);
      for (int i = 0; i < ks.ell(); ++i)
        for (int f = 0; f <= K; ++f) {
          if (!got[i][f]) {
            ++rep.unknown;
            continue;
          }
          rep.record(got[i][f]->truncated(N).is_zero(),
                     "slot2 form" + std::to_string(j) + "I" + std::to_string(b) + " at " + std::to_string(i) + "," +
                         std::to_string(f));
        }
    }
  // First slot: x-series of rho lie in Ad(sigma^-1) K^- g, so they pair to zero with Ad(sigma^-1) L^- g.
  const int nfun = ch.basis_count(OuterKind::Function, testDepth);
  for (int j = 0; j < nfun; ++j)
    for (int b = 0; b < d; ++b) {
      LaurentVec a;
      for (int i = 0; i < ks.ell(); ++i) a.push_back(ch.conj_expansion(OuterKind::Function, i, j, b, K + 1));
      auto got = pair_first(lie, ks.rho(), a, -ch.xi_pole(), K);
      for (int i = 0; i < ks.ell(); ++i)
        for (int f = -ch.xi_pole(); f <= K; ++f) {
          if (!got[i][f + ch.xi_pole()]) {
            ++rep.unknown;
            continue;
          }
          rep.record(got[i][f + ch.xi_pole()]->truncated(N).is_zero(),
                     "slot1 fun" + std::to_string(j) + "I" + std::to_string(b) + " at " + std::to_string(i) + "," +
                         std::to_string(f));
        }
    }
  // Diagonal residue: the polar part in x is exactly gamma dx / (x - y), and gamma is the identity under kappa.
  for (int i = 0; i < ks.ell(); ++i)
    for (int j = 0; j < ks.ell(); ++j)
      for (int e = -K - 1; e <= -1; ++e)
        for (int f = 0; f <= K; ++f) {
          Opt2 v = ks.rho().at(i, j, e, f), tv = ks.t().at(i, j, e, f);
          if (!v || !tv) {
            ++rep.unknown;
            continue;
          }
          Ten2 want = (i == j && e == -f - 1) ? ks.gamma() : Ten2(d);
          rep.record((*v - want).map([N](const JetScalar& x) { return x.truncated(N); }).is_zero(),
                     "residue at " + std::to_string(i) + std::to_string(j) + "," + std::to_string(e) + "," +
                         std::to_string(f));
          rep.record(tv->is_zero(), "t polar part at " + std::to_string(e));
        }
  bool identity = true;
  for (int p = 0; p < d; ++p)
    for (int r = 0; r < d; ++r) {
      Rational s(0);
      for (int q = 0; q < d; ++q) s += lie.gamma(p, q) * lie.gram(q, r);
      identity = identity && s == Rational(p == r ? 1 : 0);
    }
  rep.record(identity, "gamma is not the identity under kappa");
  rep.details["gamma"] = "sum_q gamma(p,q) kappa(I_q, I_r) = delta(p,r)";
  rep.seconds = timer.seconds();
  return rep;
}

// ---- Transported frame, Poisson bracket and the Hitchin identities ----

/// theta(a) = Ad(sigma(u)^-1) Ad(sigma(u0)) a with its Ad(sigma^-1) L^- g part removed, so it lies in
/// L^+ g (+) span xi. Coordinates per puncture certified through cert.
struct Transported {
  std::string label;
  LaurentVec theta;
};

inline Transported transport(const BundleChart& ch, const std::string& label, const LaurentVec& a0, int cert) {
  const LieData& lie = ch.lie();
  // sigma(u0) with exact constant entries, so products keep the chart's jet order
  auto base = [](const MatSeries& m) {
    return m.map([](const Mat& x) { return x.map([](const JetScalar& y) { return JetScalar(y.constant()); }); });
  };
  LaurentVec X;
  for (int i = 0; i < ch.ell(); ++i) {
    MatSeries A = a0[i].map([&](const LieVec& v) { return lie.matrix(v); });
    MatSeries conj = laurent_mul(laurent_mul(base(ch.sigma().g[i]), A), base(ch.sigma().ginv[i]));
    conj = laurent_mul(laurent_mul(ch.sigma().ginv[i], conj), ch.sigma().g[i]);
    X.push_back(conj.map([&](const Mat& m) { return lie.coords(m); }).normalized().truncated(cert));
  }
  LoopDecomposition dec = decompose_loop(ch, X);
  Transported out;
  out.label = label;
  for (int i = 0; i < ch.ell(); ++i) {
    Laurent<LieVec> T = X[i] - loop_v_part(ch, dec, i, cert);
    for (int al = 0; al < ch.m(); ++al)
      if (!dec.c[al].is_zero()) T = T + laurent_scale(ch.xi_coords(al, i).truncated(cert), dec.c[al]);
    out.theta.push_back(T.truncated(cert).normalized());
  }
  return out;
}

/// The sample frame at u0: I_b z_i^k for k <= kmax and xi_alpha(u0).
inline std::vector<Transported> transported_frame(const BundleChart& ch, int kmax, int cert) {
  const int d = ch.dim(), ell = ch.ell();
  std::vector<Transported> out;
  for (int i = 0; i < ell; ++i)
    for (int k = 0; k <= kmax; ++k)
      for (int b = 0; b < d; ++b) {
        LaurentVec a;
        for (int j = 0; j < ell; ++j) {
          LieVec v(d);
          if (j == i) v[b] = JetScalar(Rational(1));
          a.push_back(j == i ? Laurent<LieVec>::monomial(j, k, v) : Laurent<LieVec>(j, 0, kExactDeg, 0, LieVec(d)));
        }
        out.push_back(transport(ch, "I" + std::to_string(b) + "z" + std::to_string(i) + "^" + std::to_string(k), a,
                                cert));
      }
  for (int al = 0; al < ch.m(); ++al) {
    LaurentVec a;
    for (int i = 0; i < ell; ++i)
      a.push_back(ch.xi_coords(al, i)
                      .map([](const LieVec& v) { return v.map([](const JetScalar& x) { return JetScalar(x.constant()); }); })
                      .normalized());
    out.push_back(transport(ch, "xi" + std::to_string(al), a, cert));
  }
  return out;
}

inline LaurentVec add(const LaurentVec& a, const LaurentVec& b, const JetScalar& s = JetScalar(Rational(1))) {
  LaurentVec out;
  for (size_t i = 0; i < a.size(); ++i) out.push_back(a[i] + laurent_scale(b[i], s));
  return out;
}
inline LaurentVec derive(const LaurentVec& a, int alpha) {
  LaurentVec out;
  for (auto& blk : a) out.push_back(blk.map([alpha](const LieVec& v) { return v.derive(alpha); }));
  return out;
}
inline std::vector<LaurentVec> omega_series(const KernelSet& ks, int cert) {
  std::vector<LaurentVec> out(ks.m());
  for (int al = 0; al < ks.m(); ++al)
    for (int i = 0; i < ks.ell(); ++i) out[al].push_back(ks.chart().expand(ks.chart().omega()[al], i, cert));
  return out;
}

/// {a, b} = [a, b] + sum_alpha B(omega_alpha, a) d_alpha b - B(omega_alpha, b) d_alpha a.
/// `omegas` holds the expansions of omega_alpha through at least the pole order of a and b.
inline LaurentVec poisson_bracket(const KernelSet& ks, const std::vector<LaurentVec>& omegas, const LaurentVec& a,
                                  const LaurentVec& b, int cert) {
  const LieData& lie = ks.lie();
  LaurentVec out = bracket_series(lie, a, b, cert);
  for (int al = 0; al < ks.m(); ++al) {
    const LaurentVec& w = omegas[al];
    const JetScalar wa = pair_series(lie, a, w), wb = pair_series(lie, b, w);
    out = add(out, derive(b, al), wa);
    out = add(out, derive(a, al), JetScalar() - wb);
  }
  return out;
}

/// Pi_+ and Pi_- of a loop through the kernels, as series on degrees [lo, hi].
inline std::pair<LaurentVec, LaurentVec> split_kernel(const KernelSet& ks, const LaurentVec& a, int lo, int hi) {
  auto plus = project_kernel(ks, Projection::PlusLoop, a, lo, hi);
  auto minus = project_kernel(ks, Projection::MinusLoop, a, lo, hi);
  LaurentVec P, M;
  for (int i = 0; i < ks.ell(); ++i) {
    Laurent<LieVec> p(i, lo, hi, 0, LieVec(ks.dim())), m(i, lo, hi, 0, LieVec(ks.dim()));
    for (int e = lo; e <= hi; ++e) {
      if (!plus[i][e - lo] || !minus[i][e - lo]) throw Error(ErrorCode::DepthExceeded, "projection window");
      p.set(e, *plus[i][e - lo]);
      m.set(e, *minus[i][e - lo]);
    }
    P.push_back(p);
    M.push_back(m);
  }
  return {P, M};
}

/// Coefficient-wise equality on [lo, hi]; nullopt when either side is not certified there.
inline std::optional<bool> equal_on(const LaurentVec& a, const LaurentVec& b, int lo, int hi, int order,
                                    std::string* where) {
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].certified_to() < hi || b[i].certified_to() < hi) return std::nullopt;
    for (int e = lo; e <= hi; ++e) {
      const LieVec x = e < a[i].lo() || e > a[i].stored_hi() ? LieVec() : a[i].at(e);
      const LieVec y = e < b[i].lo() || e > b[i].stored_hi() ? LieVec() : b[i].at(e);
      if (!(x - y).truncated(order).is_zero()) {
        if (where) *where = "puncture " + std::to_string(i) + " degree " + std::to_string(e);
        return false;
      }
    }
  }
  return true;
}

/// a - b lies in Ad(sigma^-1) L^- g: its xi-coefficients vanish and it equals its outer part through depth.
inline std::optional<bool> equal_mod_outer(const BundleChart& ch, const LaurentVec& a, const LaurentVec& b, int depth, int order,
                            std::string* where) {
  LaurentVec D = add(a, b, JetScalar(Rational(-1)));
  for (auto& blk : D) blk = blk.map([order](const LieVec& v) { return v.truncated(order); }).normalized();
  LoopDecomposition dec = decompose_loop(ch, D);
  for (int al = 0; al < ch.m(); ++al)
    if (!dec.c[al].truncated(order).is_zero()) {
      if (where) *where = "xi component " + std::to_string(al);
      return false;
    }
  LaurentVec V;
  for (int i = 0; i < ch.ell(); ++i) V.push_back(loop_v_part(ch, dec, i, depth));
  return equal_on(D, V, 0, depth, order, where);
}

/// {theta a, theta b} = [Pi_+ theta a, Pi_+ theta b] - [Pi_- theta a, Pi_- theta b]
///                    = 1/2([R theta a, theta b] + [theta a, R theta b]).
inline IdentityReport r_bracket_lemma(const KernelSet& ks, int kmax, int depth) {
  detail::Timer timer;
  const BundleChart& ch = ks.chart();
  const LieData& lie = ks.lie();
  const int order = ks.jet_order() - 1, xp = ch.xi_pole();
  // brackets at degree <= depth need each factor through depth + xp
  const int cert = depth + xp;
  ks.ensure_columns(std::min(ks.column_cap(), cert));
  auto frame = transported_frame(ch, kmax, cert);
  std::vector<std::pair<LaurentVec, LaurentVec>> split;
  for (auto& t : frame) split.push_back(split_kernel(ks, t.theta, -xp, cert));
  const auto omegas = omega_series(ks, 2 * xp + 1);
  IdentityReport rep;
  rep.name = "r_bracket_lemma";
  rep.window = "modulo Ad(sigma^-1) L^- g through degree " + std::to_string(depth) + ", frame z^k with k <= " +
               std::to_string(kmax) + " and xi";
  const JetScalar half(Rational(1, 2));
  for (size_t p = 0; p < frame.size(); ++p)
    for (size_t q = p; q < frame.size(); ++q) {
      const LaurentVec& A = frame[p].theta;
      const LaurentVec& B = frame[q].theta;
      const auto& [Ap, Am] = split[p];
      const auto& [Bp, Bm] = split[q];
      LaurentVec lhs = poisson_bracket(ks, omegas, A, B, cert);
      LaurentVec rhs1 = add(bracket_series(lie, Ap, Bp, cert), bracket_series(lie, Am, Bm, cert), JetScalar(Rational(-1)));
      LaurentVec RA = add(Ap, Am, JetScalar(Rational(-1))), RB = add(Bp, Bm, JetScalar(Rational(-1)));
      LaurentVec rhs2 = add(bracket_series(lie, RA, B, cert), bracket_series(lie, A, RB, cert));
      for (auto& blk : rhs2) blk = laurent_scale(blk, half);
      const std::string tag = frame[p].label + "," + frame[q].label;
      std::string where;
      auto note = [&](std::optional<bool> ok, const std::string& what) {
        if (!ok)
          ++rep.unknown;
        else
          rep.record(*ok, what + " " + tag + " " + where);
      };
      // Tangent vectors live in Lg / Ad(sigma^-1) L^- g: compare modulo that subspace.
      note(equal_mod_outer(ch, lhs, rhs1, depth, order, &where), "projection form");
      note(equal_mod_outer(ch, lhs, rhs2, depth, order, &where), "R form");
      // Pi_+ + Pi_- reproduces theta, as the proof uses.
      note(equal_on(add(Ap, Am), A, -xp, depth, ks.jet_order(), &where), "split");
    }
  rep.details["bracket_sign"] = "1/2([R a, b] + [a, R b])";
  rep.seconds = timer.seconds();
  return rep;
}

/// g-valued series known through cert; nullopt above.
inline Series1 series1_of(const LaurentVec& a, int d, int cert) {
  Series1 s;
  s.ell = static_cast<int>(a.size());
  s.d = d;
  auto data = std::make_shared<LaurentVec>(a);
  s.lo = [data](int i) { return std::min(0, (*data)[i].lo()); };
  s.hi = [](int) { return kExactDeg; };
  s.coeff = [data, cert, d](int i, int e) -> Opt1 {
    if (e > cert) return std::nullopt;
    const auto& L = (*data)[i];
    if (e < L.lo() || e > L.stored_hi()) return LieVec(d);
    return L.at(e);
  };
  return s;
}

/// B(v (x) w, T) summed over the finitely many contributing monomials; nullopt if any is unknown.
inline std::optional<JetScalar> pair2(const LieData& lie, const Series2& T, const LaurentVec& v, const LaurentVec& w) {
  const int d = lie.dim();
  auto lower = [&](const LieVec& x) {
    LieVec y(d);
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q)
        if (!x[p].is_zero() && sgn(lie.gram(p, q)) != 0) y[q] += x[p] * JetScalar(lie.gram(p, q));
    return y;
  };
  JetScalar s;
  for (int i = 0; i < T.ell(); ++i)
    for (int j = 0; j < T.ell(); ++j) {
      const int emax = -1 - v[i].lo(), fmax = -1 - w[j].lo();
      const int fmin = T.ylo(i, j, emax);
      for (int f = fmin; f <= fmax; ++f) {
        const int wd = -1 - f;
        if (wd > w[j].certified_to()) throw Error(ErrorCode::WindowTooSmall, "second probe window");
        if (wd > w[j].stored_hi() || w[j].at(wd).is_zero()) continue;
        const LieVec W = lower(w[j].at(wd));
        for (int e = T.xlo(i, j, f); e <= emax; ++e) {
          const int vd = -1 - e;
          if (vd > v[i].certified_to()) throw Error(ErrorCode::WindowTooSmall, "first probe window");
          if (vd > v[i].stored_hi() || v[i].at(vd).is_zero()) continue;
          Opt2 t = T.at(i, j, e, f);
          if (!t) return std::nullopt;
          const LieVec V = lower(v[i].at(vd));
          for (int p = 0; p < d; ++p)
            if (!V[p].is_zero())
              for (int q = 0; q < d; ++q)
                if (!W[q].is_zero() && !(*t)(p, q).is_zero()) s += V[p] * W[q] * (*t)(p, q);
        }
      }
    }
  return s;
}

/// B({theta a, theta b}, c) = B(theta a (x) theta b, [1 (x) c, r] + [c (x) 1, rbar]); with extended the
/// bracket is [a, b] and the kernels are (rho, rhobar).
inline IdentityReport hitchin_weak_identity(const KernelSet& ks, int kmax, int testDepth, bool extended) {
  detail::Timer timer;
  const BundleChart& ch = ks.chart();
  const LieData& lie = ks.lie();
  const int d = ks.dim(), order = ks.jet_order() - 1, xp = ch.xi_pole();
  const int pc = testDepth + ch.sigma_shift();
  const int cert = pc + 3 * xp + kmax + 4;
  ks.ensure_columns(std::min(ks.column_cap(), pc + 2 * xp + 2));
  auto frame = transported_frame(ch, kmax, cert);
  const auto omegas = omega_series(ks, 2 * xp + 1);
  const Series2& A = extended ? ks.rho() : ks.r();
  const Series2& Abar = extended ? ks.rhobar() : ks.rbar();
  IdentityReport rep;
  rep.name = extended ? "hitchin_weak_extended" : "hitchin_weak";
  rep.window = "form probes pole <= " + std::to_string(testDepth) + ", frame z^k with k <= " + std::to_string(kmax) +
               " and xi";
  long nontrivial = 0;
  const int nforms = ch.basis_count(OuterKind::Form, testDepth);
  for (int jf = 0; jf < nforms; ++jf)
    for (int b = 0; b < d; ++b) {
      LaurentVec c;
      for (int i = 0; i < ks.ell(); ++i) c.push_back(ch.conj_expansion(OuterKind::Form, i, jf, b, cert));
      Series1 cs = series1_of(c, d, cert);
      Series2 T = ad_slot(lie, cs, A, false) + ad_slot(lie, cs, Abar, true);
      for (size_t p = 0; p < frame.size(); ++p)
        for (size_t q = 0; q < frame.size(); ++q) {
          const LaurentVec& a = frame[p].theta;
          const LaurentVec& bb = frame[q].theta;
          LaurentVec br = extended ? bracket_series(lie, a, bb, cert) : poisson_bracket(ks, omegas, a, bb, cert);
          const JetScalar want = pair_series(lie, br, c).truncated(order);
          std::optional<JetScalar> got = pair2(lie, T, a, bb);
          if (!got) {
            ++rep.unknown;
            continue;
          }
          nontrivial += !want.is_zero();
          rep.record((got->truncated(order) - want).is_zero(),
                     frame[p].label + "," + frame[q].label + ",form" + std::to_string(jf) + "I" + std::to_string(b));
        }
    }
  rep.details["nonzero_pairings"] = std::to_string(nontrivial);
  rep.seconds = timer.seconds();
  return rep;
}

}  // namespace dynr
