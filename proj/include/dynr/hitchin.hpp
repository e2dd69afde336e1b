#pragma once
// The punctured Hitchin phase space over the chart: Lax matrix, quadratic Hamiltonians, brackets, Lax pair.

#include <random>

#include "dynr/linalg.hpp"
#include "dynr/yangbaxter.hpp"

namespace dynr {

/// Variables p_0..p_{m-1}, then mu_{i,a} at m + i d + a.
struct PhaseLayout {
  int m = 0, ell = 0, d = 0;
  int nvars() const { return m + ell * d; }
  int p(int alpha) const { return alpha; }
  int mu(int i, int a) const { return m + i * d + a; }
  std::string var_name(int k) const {
    if (k < m) return "p" + std::to_string(k + 1);
    const int i = (k - m) / d, a = (k - m) % d;
    return "mu" + std::to_string(i + 1) + "_" + std::to_string(a + 1);
  }
};

/// Polynomial in the phase variables with jet coefficients; monomials are exponent vectors.
class PhasePolynomial {
 public:
  using Monomial = std::vector<int>;

  PhasePolynomial() = default;
  explicit PhasePolynomial(int nvars) : n_(nvars) {}
  static PhasePolynomial variable(int nvars, int k) {
    PhasePolynomial P(nvars);
    Monomial e(nvars, 0);
    e[k] = 1;
    P.t_[e] = JetScalar(Rational(1));
    return P;
  }
  static PhasePolynomial constant(int nvars, const JetScalar& c) {
    PhasePolynomial P(nvars);
    P.add_term(Monomial(nvars, 0), c);
    return P;
  }

  int nvars() const { return n_; }
  const std::map<Monomial, JetScalar>& terms() const { return t_; }
  void add_term(const Monomial& e, const JetScalar& c) {
    if (c.is_zero()) return;
    auto it = t_.find(e);
    if (it == t_.end()) {
      t_.emplace(e, c);
      return;
    }
    it->second += c;
    if (it->second.is_zero()) t_.erase(it);
  }
  bool is_zero() const { return t_.empty(); }
  int degree() const {
    int d = -1;
    for (auto& [e, c] : t_) {
      int s = 0;
      for (int x : e) s += x;
      d = std::max(d, s);
    }
    return d;
  }

  PhasePolynomial truncated(int order) const {
    PhasePolynomial P(n_);
    for (auto& [e, c] : t_) P.add_term(e, c.truncated(order));
    return P;
  }
  /// d/du_alpha of the coefficients.
  PhasePolynomial derive_u(int alpha) const {
    PhasePolynomial P(n_);
    for (auto& [e, c] : t_) P.add_term(e, c.derive(alpha));
    return P;
  }
  /// d/d(variable k).
  PhasePolynomial derive_var(int k) const {
    PhasePolynomial P(n_);
    for (auto& [e, c] : t_) {
      if (e[k] == 0) continue;
      Monomial f = e;
      --f[k];
      P.add_term(f, c * JetScalar(Rational(e[k])));
    }
    return P;
  }
  JetScalar evaluate(const std::vector<Rational>& x) const {
    JetScalar s;
    for (auto& [e, c] : t_) {
      Rational mono = 1;
      for (int k = 0; k < n_; ++k)
        for (int r = 0; r < e[k]; ++r) mono *= x[k];
      s += c * JetScalar(mono);
    }
    return s;
  }

  PhasePolynomial& operator+=(const PhasePolynomial& o) {
    if (n_ == 0) n_ = o.n_;
    for (auto& [e, c] : o.t_) add_term(e, c);
    return *this;
  }
  PhasePolynomial& operator-=(const PhasePolynomial& o) {
    if (n_ == 0) n_ = o.n_;
    for (auto& [e, c] : o.t_) add_term(e, -c);
    return *this;
  }
  friend PhasePolynomial operator+(PhasePolynomial a, const PhasePolynomial& b) { return a += b; }
  friend PhasePolynomial operator-(PhasePolynomial a, const PhasePolynomial& b) { return a -= b; }
  friend PhasePolynomial operator*(const PhasePolynomial& a, const JetScalar& s) {
    PhasePolynomial P(a.n_);
    for (auto& [e, c] : a.t_) P.add_term(e, c * s);
    return P;
  }
  friend PhasePolynomial operator*(const PhasePolynomial& a, const PhasePolynomial& b) {
    PhasePolynomial P(std::max(a.n_, b.n_));
    for (auto& [ea, ca] : a.t_)
      for (auto& [eb, cb] : b.t_) {
        Monomial e = ea;
        for (size_t k = 0; k < e.size(); ++k) e[k] += eb[k];
        P.add_term(e, ca * cb);
      }
    return P;
  }
  friend bool operator==(const PhasePolynomial& a, const PhasePolynomial& b) { return (a - b).is_zero(); }

  std::string str(const PhaseLayout& L) const {
    if (t_.empty()) return "0";
    std::string s;
    for (auto& [e, c] : t_) {
      if (!s.empty()) s += " + ";
      s += "(" + c.str() + ")";
      for (int k = 0; k < n_; ++k)
        if (e[k]) s += "*" + L.var_name(k) + (e[k] > 1 ? "^" + std::to_string(e[k]) : "");
    }
    return s;
  }

 private:
  int n_ = 0;
  std::map<Monomial, JetScalar> t_;
};

/// L = sum_alpha p_alpha omega_alpha + sum_{i,a} mu_{i,a} r_{i,0,a}; basis[k] is the form multiplying variable k.
struct LaxForm {
  PhaseLayout layout;
  std::vector<LaurentVec> basis;
  int cert = 0;
};

/// Builds L with every basis form expanded through degree cert.
inline LaxForm lax_matrix(const KernelSet& ks, int cert) {
  const BundleChart& ch = ks.chart();
  LaxForm L;
  L.layout = {ks.m(), ks.ell(), ks.dim()};
  L.cert = cert;
  ks.ensure_columns(0);
  for (int al = 0; al < ks.m(); ++al) {
    LaurentVec w;
    for (int i = 0; i < ks.ell(); ++i) w.push_back(ch.expand(ch.omega()[al], i, cert));
    L.basis.push_back(std::move(w));
  }
  for (int j = 0; j < ks.ell(); ++j)
    for (int a = 0; a < ks.dim(); ++a) {
      LaurentVec w;
      for (int i = 0; i < ks.ell(); ++i) w.push_back(ks.column_series(j, 0, a, i, cert));
      L.basis.push_back(std::move(w));
    }
  return L;
}

/// Pole order at most one, with residue sum_a mu_{i,a} I^a at puncture i.
inline IdentityReport lax_pole_check(const KernelSet& ks, const LaxForm& L) {
  IdentityReport rep;
  rep.name = "lax_pole_structure";
  rep.window = "degrees below 0";
  const int N = ks.jet_order(), d = ks.dim();
  for (int k = 0; k < L.layout.nvars(); ++k)
    for (int i = 0; i < ks.ell(); ++i) {
      const auto& s = L.basis[k][i];
      for (int e = std::min(s.lo(), -1); e < 0; ++e) {
        LieVec want(d);
        if (k >= L.layout.m && e == -1 && (k - L.layout.m) / d == i) want = ks.lie().dual_coords((k - L.layout.m) % d);
        rep.record((s.at(e) - want).truncated(N).is_zero(),
                   L.layout.var_name(k) + " at " + std::to_string(i) + "," + std::to_string(e));
      }
    }
  return rep;
}

namespace detail {

/// sum_{v,w} x_v x_w f(v, w) as a polynomial.
template <class F>
PhasePolynomial quadratic_form(const PhaseLayout& P, F f) {
  PhasePolynomial H(P.nvars());
  for (int v = 0; v < P.nvars(); ++v)
    for (int w = 0; w < P.nvars(); ++w) {
      JetScalar c = f(v, w);
      if (c.is_zero()) continue;
      PhasePolynomial::Monomial e(P.nvars(), 0);
      ++e[v];
      ++e[w];
      H.add_term(e, c);
    }
  return H;
}

template <class F>
PhasePolynomial linear_form(const PhaseLayout& P, F f) {
  PhasePolynomial H(P.nvars());
  for (int v = 0; v < P.nvars(); ++v) {
    PhasePolynomial::Monomial e(P.nvars(), 0);
    ++e[v];
    H.add_term(e, f(v));
  }
  return H;
}

}  // namespace detail

/// H_h = 1/2 res_{z_i}(z_i^e kappa(L, L)), the functional dual to the z_i^{-1-e} (dz_i)^2 coefficient.
inline PhasePolynomial quadratic_hamiltonian(const LieData& lie, const LaxForm& L, int i, int e) {
  const int target = -1 - e;
  if (target + 1 > L.cert) throw Error(ErrorCode::WindowTooSmall, "Lax expansion too short for the functional");
  const JetScalar half(make_rational(1, 2));
  return detail::quadratic_form(L.layout, [&](int v, int w) {
    JetScalar s;
    const auto &A = L.basis[v][i], &B = L.basis[w][i];
    const int va = A.valuation(), vb = B.valuation();
    if (va >= kExactDeg || vb >= kExactDeg) return s;
    for (int a = va; a <= target - vb; ++a) s += lie.kappa(A.at(a), B.at(target - a));
    return s * half;
  });
}

/// H_i read off the kernel values at the punctures: sum_alpha <mu_i, omega_alpha(p_i)> p_alpha
/// + <mu_i (x) mu_i, s(p_i, p_i)> + sum_{j != i} <mu_i (x) mu_j, r(p_i, p_j)>.
inline PhasePolynomial gaudin_hamiltonian(const KernelSet& ks, int i) {
  const LieData& lie = ks.lie();
  const PhaseLayout P{ks.m(), ks.ell(), ks.dim()};
  const int d = ks.dim();
  ks.ensure_columns(0);
  auto mu_dot = [&](int a, const LieVec& X) { return lie.kappa(lie.dual_coords(a), X); };
  PhasePolynomial H(P.nvars());
  for (int al = 0; al < ks.m(); ++al) {
    Opt1 w = ks.omega(al).at(i, 0);
    if (!w) throw Error(ErrorCode::WindowTooSmall, "omega at puncture");
    for (int a = 0; a < d; ++a)
      H += PhasePolynomial::variable(P.nvars(), P.p(al)) * PhasePolynomial::variable(P.nvars(), P.mu(i, a)) *
           mu_dot(a, *w);
  }
  for (int j = 0; j < ks.ell(); ++j) {
    Opt2 T = j == i ? ks.s().at(i, i, 0, 0) : ks.r().at(i, j, 0, 0);
    if (!T) throw Error(ErrorCode::WindowTooSmall, "kernel at punctures");
    for (int b = 0; b < d; ++b) {
      LieVec col(d);
      for (int p = 0; p < d; ++p) col[p] = (*T)(p, b);
      for (int a = 0; a < d; ++a)
        H += PhasePolynomial::variable(P.nvars(), P.mu(i, a)) * PhasePolynomial::variable(P.nvars(), P.mu(j, b)) *
             mu_dot(a, col);
    }
  }
  return H;
}

/// {F,G} = sum_alpha (dF/dp_alpha d_alpha G - d_alpha F dG/dp_alpha) + sign sum_i <mu_i, [d_{mu_i}F, d_{mu_i}G]>.
inline PhasePolynomial phase_bracket(const LieData& lie, const PhaseLayout& P, const PhasePolynomial& F,
                                     const PhasePolynomial& G, int lieSign = -1) {
  PhasePolynomial out(P.nvars());
  for (int al = 0; al < P.m; ++al) {
    out += F.derive_var(P.p(al)) * G.derive_u(al);
    out -= F.derive_u(al) * G.derive_var(P.p(al));
  }
  const JetScalar sgnj = JetScalar(Rational(lieSign));
  for (int i = 0; i < P.ell; ++i) {
    std::vector<PhasePolynomial> dF, dG;
    for (int a = 0; a < P.d; ++a) {
      dF.push_back(F.derive_var(P.mu(i, a)));
      dG.push_back(G.derive_var(P.mu(i, a)));
    }
    for (auto& s : lie.nonzero_structure()) {
      if (dF[s.a].is_zero() || dG[s.b].is_zero()) continue;
      out += dF[s.a] * dG[s.b] * PhasePolynomial::variable(P.nvars(), P.mu(i, s.c)) * (sgnj * JetScalar(s.v));
    }
  }
  return out;
}

/// Hamiltonian functional z_i^e (d/dz_i)^2.
struct QuadraticFunctional {
  int puncture = 0, power = 0;
  std::string str() const { return "z" + std::to_string(puncture + 1) + "^" + std::to_string(power); }
};

inline std::vector<QuadraticFunctional> functional_basis(int ell, int E) {
  std::vector<QuadraticFunctional> out;
  for (int i = 0; i < ell; ++i)
    for (int e = -E; e <= 1; ++e) out.push_back({i, e});
  return out;
}

inline RatMatrix base_point_rows(const std::vector<PhasePolynomial>& polys) {
  std::map<PhasePolynomial::Monomial, int> cols;
  for (auto& P : polys)
    for (auto& [e, c] : P.terms())
      if (sgn(c.constant()) != 0) cols.emplace(e, 0);
  int k = 0;
  for (auto& [e, idx] : cols) idx = k++;
  RatMatrix M;
  for (auto& P : polys) {
    std::vector<Rational> row(cols.size(), Rational(0));
    for (auto& [e, c] : P.terms())
      if (sgn(c.constant()) != 0) row[cols[e]] = c.constant();
    M.push_back(row);
  }
  return M;
}

struct HitchinOptions {
  int basisBound = 6;   // functionals z_i^e for e in [-E, 1]
  int laxCert = 8;      // Lax expansion certified through this degree
  int lieSign = -1;
};

/// Pairwise brackets of the quadratic Hamiltonians vanish; Casimir and counting checks; H_i oracle.
inline std::vector<IdentityReport> commutativity_suite(const KernelSet& ks, const HitchinOptions& opt) {
  detail::Timer timer;
  const LieData& lie = ks.lie();
  const int N = ks.jet_order(), order = N - 1;
  if (N < 1) throw Error(ErrorCode::JetOrderTooLow, "brackets need first u-derivatives");
  LaxForm L = lax_matrix(ks, std::max(opt.laxCert, opt.basisBound + 2));
  const PhaseLayout& P = L.layout;
  auto basis = functional_basis(ks.ell(), opt.basisBound);
  std::vector<PhasePolynomial> H;
  for (auto& f : basis) H.push_back(quadratic_hamiltonian(lie, L, f.puncture, f.power));

  IdentityReport comm;
  comm.name = "hamiltonian_commutativity";
  comm.window = "functionals z_i^e (d/dz_i)^2, e in [" + std::to_string(-opt.basisBound) + ",1], jets to order " +
                std::to_string(order);
  for (size_t a = 0; a < H.size(); ++a)
    for (size_t b = a; b < H.size(); ++b) {
      PhasePolynomial br = phase_bracket(lie, P, H[a], H[b], opt.lieSign).truncated(order);
      comm.record(br.is_zero(), "{" + basis[a].str() + "," + basis[b].str() + "}");
    }
  comm.details["lie_poisson_sign"] = opt.lieSign > 0 ? "+" : "-";

  IdentityReport gaudin;
  gaudin.name = "gaudin_commutativity";
  gaudin.window = "H_i at jet order " + std::to_string(order);
  std::vector<PhasePolynomial> Hi;
  for (int i = 0; i < ks.ell(); ++i) Hi.push_back(quadratic_hamiltonian(lie, L, i, 0));
  for (int i = 0; i < ks.ell(); ++i)
    for (int j = i + 1; j < ks.ell(); ++j) {
      PhasePolynomial br = phase_bracket(lie, P, Hi[i], Hi[j], opt.lieSign);
      gaudin.record(br.truncated(order).is_zero(), "{H" + std::to_string(i + 1) + ",H" + std::to_string(j + 1) + "}");
      gaudin.details["{H" + std::to_string(i + 1) + ",H" + std::to_string(j + 1) + "} at base point"] =
          br.truncated(0).str(P);
    }

  IdentityReport oracle;
  oracle.name = "gaudin_hamiltonian_oracle";
  oracle.window = "H_i(formula) vs H_i(extraction) at jet order " + std::to_string(N);
  for (int i = 0; i < ks.ell(); ++i) {
    PhasePolynomial diff = (gaudin_hamiltonian(ks, i) - Hi[i]).truncated(N);
    oracle.record(diff.is_zero(), "H" + std::to_string(i + 1) + ": " + diff.str(P));
    oracle.details["H" + std::to_string(i + 1) + " at base point"] = Hi[i].truncated(0).str(P);
  }

  IdentityReport casimir;
  casimir.name = "casimir";
  casimir.window = "leading functional z_i^1 against every coordinate";
  std::vector<PhasePolynomial> coords;
  for (int k = 0; k < P.nvars(); ++k) coords.push_back(PhasePolynomial::variable(P.nvars(), k));
  for (int i = 0; i < ks.ell(); ++i) {
    PhasePolynomial C = quadratic_hamiltonian(lie, L, i, 1);
    for (int k = 0; k < P.nvars(); ++k)
      casimir.record(phase_bracket(lie, P, C, coords[k], opt.lieSign).truncated(order).is_zero(),
                     "z" + std::to_string(i + 1) + " vs " + P.var_name(k));
  }
  // Dimension of span{H_h} and of its Casimir part at the base point.
  std::vector<PhasePolynomial> brackets;
  for (auto& h : H) {
    std::vector<PhasePolynomial> parts;
    for (auto& c : coords) parts.push_back(phase_bracket(lie, P, h, c, opt.lieSign).truncated(0));
    brackets.insert(brackets.end(), parts.begin(), parts.end());
  }
  // Casimir dimension = rank(H) - rank of the bracket map restricted to span{H}.
  RatMatrix Hrows = base_point_rows([&] {
    std::vector<PhasePolynomial> v;
    for (auto& h : H) v.push_back(h.truncated(0));
    return v;
  }());
  const int nc = P.nvars();
  std::vector<PhasePolynomial> stacked;
  for (size_t a = 0; a < H.size(); ++a) {
    // encode the bracket tuple of H[a] as one polynomial in shifted variable blocks
    PhasePolynomial row(nc * (nc + 1));
    for (int k = 0; k < nc; ++k)
      for (auto& [e, c] : brackets[a * nc + k].terms()) {
        PhasePolynomial::Monomial f(nc * (nc + 1), 0);
        for (int q = 0; q < nc; ++q) f[k * nc + q] = e[q];
        f[nc * nc + k] = 1;
        row.add_term(f, c);
      }
    stacked.push_back(row);
  }
  const int rankH = rank(Hrows), rankB = rank(base_point_rows(stacked));
  casimir.details["functional_span_rank"] = std::to_string(rankH);
  casimir.details["casimir_dimension"] = std::to_string(rankH - rankB);

  for (auto* r : {&comm, &gaudin, &oracle, &casimir}) r->seconds = timer.seconds();
  // With one puncture there is no pair of Gaudin Hamiltonians.
  if (ks.ell() == 1) return {comm, oracle, casimir};
  return {comm, gaudin, oracle, casimir};
}

/// Q = 1/2 R(h L) per basis variable, R = Pi_+ - Pi_-, on degrees [lo, hi].
inline std::vector<LaurentVec> lax_q_basis(const KernelSet& ks, const LaxForm& L, const QuadraticFunctional& h,
                                           int lo, int hi) {
  std::vector<LaurentVec> out;
  const int d = ks.dim();
  const JetScalar half(make_rational(1, 2));
  for (int v = 0; v < L.layout.nvars(); ++v) {
    LaurentVec hl;
    for (int i = 0; i < ks.ell(); ++i) {
      const auto& b = L.basis[v][i];
      Laurent<LieVec> s(i, std::min(lo, b.lo() + h.power), L.cert + h.power, 0, LieVec(d));
      if (i == h.puncture) {
        for (int e = b.lo(); e <= b.stored_hi(); ++e) s.set(e + h.power, b.at(e));
      }
      hl.push_back(s.normalized());
    }
    auto plus = project_kernel(ks, Projection::PlusLoop, hl, lo, hi);
    LaurentVec q;
    for (int i = 0; i < ks.ell(); ++i) {
      Laurent<LieVec> s(i, lo, hi, 0, LieVec(d));
      for (int e = lo; e <= hi; ++e) {
        if (!plus[i][e - lo]) throw Error(ErrorCode::DepthExceeded, "projection of dH(L)");
        LieVec x = *plus[i][e - lo];
        if (e >= hl[i].lo() && e <= hl[i].stored_hi()) x = x - hl[i].at(e) * half;
        s.set(e, x);
      }
      q.push_back(s);
    }
    out.push_back(std::move(q));
  }
  return out;
}

/// {H_h, B(c, L)} = B(c, [Q, L]) for constant probes c = I_b z_k^n, n in [nlo, nhi], as polynomials and at
/// sampled rational phase points.
inline IdentityReport lax_pair_check(const KernelSet& ks, const QuadraticFunctional& h, int samples, uint64_t seed,
                                     int lieSign = -1, int nlo = -3, int nhi = 1) {
  detail::Timer timer;
  const LieData& lie = ks.lie();
  const int N = ks.jet_order(), order = N - 1, d = ks.dim();
  const int qhi = -nlo + 1, cert = qhi + 6;
  LaxForm L = lax_matrix(ks, cert);
  const PhaseLayout& P = L.layout;
  const int qlo = -ks.chart().xi_pole() - 2;
  std::vector<LaurentVec> Q = lax_q_basis(ks, L, h, qlo, qhi);
  PhasePolynomial H = quadratic_hamiltonian(lie, L, h.puncture, h.power);

  IdentityReport rep;
  rep.name = "lax_pair:" + h.str();
  rep.window = "probes I_b z_k^n, n in [" + std::to_string(nlo) + "," + std::to_string(nhi) + "], jets to order " +
               std::to_string(order);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> num(-9, 9), den(1, 5);
  std::vector<std::vector<Rational>> points(samples, std::vector<Rational>(P.nvars()));
  for (auto& pt : points)
    for (auto& x : pt) x = make_rational(num(rng), den(rng));

  // [Q_v, L_w] per pair, certified from the product rule.
  std::vector<std::vector<LaurentVec>> QL(P.nvars(), std::vector<LaurentVec>(P.nvars()));
  for (int v = 0; v < P.nvars(); ++v)
    for (int w = 0; w < P.nvars(); ++w) QL[v][w] = bracket_series(lie, Q[v], L.basis[w], kExactDeg);

  long polyChecked = 0, polyNonzero = 0;
  for (int k = 0; k < ks.ell(); ++k)
    for (int n = nlo; n <= nhi; ++n)
      for (int b = 0; b < d; ++b) {
        const int deg = -1 - n;
        const LieVec Ib = lie.unit(b);
        PhasePolynomial BcL = detail::linear_form(P, [&](int w) { return lie.kappa(Ib, L.basis[w][k].at(deg)); });
        PhasePolynomial lhs = phase_bracket(lie, P, H, BcL, lieSign);
        bool known = true;
        PhasePolynomial rhs = detail::quadratic_form(P, [&](int v, int w) {
          const auto& s = QL[v][w][k];
          if (!s.certified(deg)) {
            known = false;
            return JetScalar();
          }
          return lie.kappa(Ib, s.at(deg));
        });
        const std::string where = "I" + std::to_string(b) + " z" + std::to_string(k + 1) + "^" + std::to_string(n);
        if (!known) {
          ++rep.unknown;
          continue;
        }
        PhasePolynomial diff = (lhs - rhs).truncated(order);
        ++polyChecked;
        if (!diff.is_zero()) ++polyNonzero;
        for (size_t s = 0; s < points.size(); ++s)
          rep.record(diff.evaluate(points[s]).truncated(order).is_zero(), where + " at point " + std::to_string(s));
      }
  rep.details["polynomial_identities_checked"] = std::to_string(polyChecked);
  rep.details["polynomial_identities_nonzero"] = std::to_string(polyNonzero);
  rep.details["sample_points"] = std::to_string(samples);
  rep.details["lie_poisson_sign"] = lieSign > 0 ? "+" : "-";
  rep.details["Q"] = "1/2 (Pi_+ - Pi_-)(h L)";
  rep.seconds = timer.seconds();
  return rep;
}

}  // namespace dynr
