#pragma once
// The dynamical r-matrix in global-form representation: columns r_{j,k,a} = Ad(sigma^-1) G with G a
// finite combination of outer forms, assembled into r, rbar, t, rho, rhobar; the four projections
// by kernel pairing and by direct decomposition.

#include <array>
#include <map>
#include <memory>
#include <mutex>

#include "dynr/chart.hpp"
#include "dynr/tensor.hpp"

namespace dynr {

/// A g-valued Laurent polynomial per puncture (loops or forms).
using LaurentVec = std::vector<Laurent<LieVec>>;

struct RColumn {
  int puncture = 0, degree = 0, index = 0;
  GlobalFormVector G;
};

class KernelSet {
 public:
  /// K is the verification depth; columns are materialized on demand up to maxColumns.
  KernelSet(const KernelSet&) = delete;
  KernelSet& operator=(const KernelSet&) = delete;
  KernelSet(std::shared_ptr<const BundleChart> chart, int K, int slack = 2, int maxColumns = 64)
      : chart_(std::move(chart)), K_(K), slack_(slack), cap_(maxColumns), st_(std::make_shared<State>()) {
    const int d = chart_->dim();
    gamma_ = Ten2(d);
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) gamma_(p, q) = JetScalar(chart_->lie().gamma(p, q));
    build_series();
  }

  const BundleChart& chart() const { return *chart_; }
  std::shared_ptr<const BundleChart> chart_ptr() const { return chart_; }
  const LieData& lie() const { return chart_->lie(); }
  int K() const { return K_; }
  int ell() const { return chart_->ell(); }
  int dim() const { return chart_->dim(); }
  int m() const { return chart_->m(); }
  int jet_order() const { return chart_->jet_order(); }
  int column_cap() const { return cap_; }
  const Ten2& gamma() const { return gamma_; }

  /// Highest column degree solved so far (-1 if none).
  int columns_solved() const {
    std::lock_guard<std::mutex> lock(st_->mu);
    return st_->solved;
  }
  /// Largest pole bound used by the column solves.
  int pole_bound() const {
    std::lock_guard<std::mutex> lock(st_->mu);
    return st_->pole_bound;
  }

  /// Solves all columns of degree <= kmax; false when kmax exceeds the cap.
  bool ensure_columns(int kmax) const {
    if (kmax > cap_) return false;
    std::lock_guard<std::mutex> lock(st_->solve_mu);
    int from;
    {
      std::lock_guard<std::mutex> l2(st_->mu);
      if (kmax <= st_->solved) return true;
      from = st_->solved + 1;
    }
    const int to = std::min(cap_, std::max(kmax, from + 3));
    solve_batch(from, to);
    return true;
  }

  RColumn column(int j, int k, int a) const {
    if (!ensure_columns(k)) throw Error(ErrorCode::DepthExceeded, "column degree " + std::to_string(k));
    std::lock_guard<std::mutex> lock(st_->mu);
    return {j, k, a, st_->cols.at(col_index(j, k, a))};
  }

  /// Coordinates of r_{j,k,a} at puncture i and degree e (nullopt beyond the column cap).
  Opt1 column_coeff(int j, int k, int a, int i, int e) const {
    Opt1 v = column_coeff_raw(j, k, a, i, e);
    if (v) {
      std::lock_guard<std::mutex> lock(st_->mu);
      auto it = st_->perturb.find({col_index(j, k, a), i, e});
      if (it != st_->perturb.end()) *v = *v + it->second;
    }
    return v;
  }
  /// Solved columns keyed by internal index, for workspace caching.
  std::map<int, GlobalFormVector> solved_columns(int* solved, int* poleBound) const {
    std::lock_guard<std::mutex> lock(st_->mu);
    *solved = st_->solved;
    *poleBound = st_->pole_bound;
    return st_->cols;
  }
  /// Installs previously solved columns; later requests extend them lazily.
  void preload(std::map<int, GlobalFormVector> cols, int solved, int poleBound) {
    std::lock_guard<std::mutex> lock(st_->mu);
    st_->cols = std::move(cols);
    st_->solved = solved;
    st_->pole_bound = poleBound;
    st_->exp.clear();
  }
  /// Adds delta to one stored coefficient of r_{j,k,a} at (i, e). Used for mutation testing.
  void perturb(int j, int k, int a, int i, int e, const LieVec& delta) {
    std::lock_guard<std::mutex> lock(st_->mu);
    auto [it, fresh] = st_->perturb.emplace(std::array<int, 3>{col_index(j, k, a), i, e}, delta);
    if (!fresh) it->second = it->second + delta;
  }

 private:
  Opt1 column_coeff_raw(int j, int k, int a, int i, int e) const {
    if (!ensure_columns(k)) return std::nullopt;
    const auto key = std::make_pair(col_index(j, k, a), i);
    GlobalFormVector G;
    int want;
    {
      std::lock_guard<std::mutex> lock(st_->mu);
      auto it = st_->exp.find(key);
      if (it != st_->exp.end() && it->second.certified_to() >= e) return it->second.at(e);
      G = st_->cols.at(key.first);
      want = std::max(e, it == st_->exp.end() ? 8 : 2 * it->second.certified_to() + 2);
    }
    Laurent<LieVec> L = chart_->expand(G, i, want).normalized();
    std::lock_guard<std::mutex> lock(st_->mu);
    auto it = st_->exp.find(key);
    if (it == st_->exp.end())
      it = st_->exp.emplace(key, std::move(L)).first;
    else if (it->second.certified_to() < L.certified_to())
      it->second = std::move(L);
    return it->second.at(e);
  }

 public:
  /// Full expansion of a column at puncture i certified through certTo.
  Laurent<LieVec> column_series(int j, int k, int a, int i, int certTo) const {
    return chart_->expand(column(j, k, a).G, i, certTo);
  }

  const Series1& xi(int alpha) const { return xi_[alpha]; }
  const Series1& omega(int alpha) const { return omega_[alpha]; }
  const Series2& r() const { return r_; }
  const Series2& rbar() const { return rbar_; }
  const Series2& t() const { return t_; }
  const Series2& rho() const { return rho_; }
  const Series2& rhobar() const { return rhobar_; }
  /// gamma dx_i / (x_i - y_i) expanded in |y| < |x|.
  const Series2& pole_block() const { return pole_; }
  /// r minus its pole block.
  const Series2& s() const { return s_; }

 private:
  struct State {
    std::mutex mu, solve_mu;
    int solved = -1, pole_bound = -1;
    std::map<int, GlobalFormVector> cols;
    std::map<std::pair<int, int>, Laurent<LieVec>> exp;
    std::map<std::array<int, 3>, LieVec> perturb;
  };

  int col_index(int j, int k, int a) const { return (k * ell() + j) * dim() + a; }

  void solve_batch(int from, int to) const {
    const int d = dim();
    std::vector<FormTarget> targets;
    for (int k = from; k <= to; ++k)
      for (int j = 0; j < ell(); ++j)
        for (int a = 0; a < d; ++a) {
          FormTarget t;
          t.puncture = j;
          t.degree = -k - 1;
          t.value = lie().dual_coords(a);
          targets.push_back(t);
        }
    int slack = slack_;
    for (int attempt = 0; attempt < 6; ++attempt, slack *= 2) {
      const int P = to + 1 + chart_->sigma_shift() + slack;
      try {
        auto sol = chart_->solve_forms(P, targets);
        std::lock_guard<std::mutex> lock(st_->mu);
        size_t t = 0;
        for (int k = from; k <= to; ++k)
          for (int j = 0; j < ell(); ++j)
            for (int a = 0; a < d; ++a) st_->cols[col_index(j, k, a)] = sol[t++];
        st_->solved = to;
        st_->pole_bound = std::max(st_->pole_bound, P);
        return;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PoleBoundTooSmall) throw;
      }
    }
    throw Error(ErrorCode::PoleBoundTooSmall, "columns " + std::to_string(from) + ".." + std::to_string(to));
  }

  void build_series() {
    const int d = dim(), ell_ = ell();
    const KernelSet* self = this;
    for (int al = 0; al < m(); ++al) {
      Series1 x;
      x.ell = ell_;
      x.d = d;
      auto chart = chart_;
      x.lo = [chart, al](int i) {
        int v = chart->xi_coords(al, i).valuation();
        return v >= kExactDeg ? 0 : v;
      };
      x.hi = [chart, al](int i) { return chart->xi_coords(al, i).stored_hi(); };
      x.coeff = [chart, al](int i, int e) -> Opt1 { return chart->xi_coords(al, i).at(e); };
      xi_.push_back(x);

      Series1 w;
      w.ell = ell_;
      w.d = d;
      w.lo = [](int) { return 0; };
      w.hi = [](int) { return kExactDeg; };
      auto cache = std::make_shared<std::pair<std::mutex, std::map<int, Laurent<LieVec>>>>();
      w.coeff = [chart, al, cache, d](int i, int e) -> Opt1 {
        std::lock_guard<std::mutex> lock(cache->first);
        auto it = cache->second.find(i);
        if (it == cache->second.end() || it->second.certified_to() < e) {
          const int want = std::max(e, it == cache->second.end() ? 8 : 2 * it->second.certified_to() + 2);
          cache->second[i] = chart->expand(chart->omega()[al], i, want);
          it = cache->second.find(i);
        }
        if (e < it->second.lo()) return LieVec(d);
        return it->second.at(e);
      };
      omega_.push_back(w);
    }

    auto diagLo = [](int i, int j, int f) { return i == j ? std::min(0, -f - 1) : 0; };
    auto zeroLo = [](int, int, int) { return 0; };
    const Ten2 G = gamma_;
    pole_ = Series2(ell_, d, diagLo, zeroLo, [G, d](int i, int j, int e, int f) -> Opt2 {
      if (i == j && f >= 0 && e == -f - 1) return G;
      return Ten2(d);
    });
    r_ = Series2(ell_, d, diagLo, zeroLo, [self, G, d](int i, int j, int e, int f) -> Opt2 {
      if (f < 0) return Ten2(d);
      if (f <= self->cap_) {
        Ten2 t(d);
        for (int a = 0; a < d; ++a) {
          Opt1 c = self->column_coeff(j, f, a, i, e);
          if (!c) return std::nullopt;
          for (int p = 0; p < d; ++p) t(p, a) = (*c)[p];
        }
        return t;
      }
      if (e < 0) return (i == j && e == -f - 1) ? G : Ten2(d);
      return std::nullopt;
    });
    s_ = r_ - pole_;
    // rbar = gamma dy/(x - y) - tau(s(y, x))
    Series2 sflip = flip(s_);
    rbar_ = Series2(ell_, d, diagLo, zeroLo, [G, d, sflip](int i, int j, int e, int f) -> Opt2 {
      if (f < 0) return Ten2(d);
      if (e < 0) return (i == j && e == -f - 1) ? G : Ten2(d);
      Opt2 v = sflip.at(i, j, e, f);
      if (!v) return std::nullopt;
      return Ten2(d) - *v;
    });
    Series2 tt, xo;
    for (int al = 0; al < m(); ++al) {
      tt = al == 0 ? outer(omega_[al], xi_[al]) : tt + outer(omega_[al], xi_[al]);
      xo = al == 0 ? outer(xi_[al], omega_[al]) : xo + outer(xi_[al], omega_[al]);
    }
    if (m() == 0) {
      tt = Series2(ell_, d, zeroLo, zeroLo, [d](int, int, int, int) -> Opt2 { return Ten2(d); });
      xo = tt;
    }
    t_ = tt;
    rho_ = r_ + t_;
    rhobar_ = rbar_ - xo;
  }

  std::shared_ptr<const BundleChart> chart_;
  int K_, slack_, cap_;
  std::shared_ptr<State> st_;
  Ten2 gamma_;
  std::vector<Series1> xi_, omega_;
  Series2 pole_, r_, s_, rbar_, t_, rho_, rhobar_;
};

// ---- Projections ----

/// The finite support [lo, hi] of a Laurent polynomial block.
inline std::pair<int, int> support(const Laurent<LieVec>& a) {
  const int v = a.valuation();
  if (v >= kExactDeg) return {0, -1};
  int hi = a.stored_hi();
  while (hi > v && a.at(hi).is_zero()) --hi;
  return {v, hi};
}

/// kappa contraction of slot 1 of T with x: sum_p,q x_p gram(p,q) T(q, .).
inline LieVec contract1(const LieData& lie, const LieVec& x, const Ten2& T) {
  LieVec out(lie.dim());
  for (int p = 0; p < lie.dim(); ++p) {
    if (x[p].is_zero()) continue;
    for (int q = 0; q < lie.dim(); ++q) {
      if (sgn(lie.gram(p, q)) == 0) continue;
      const JetScalar w = x[p] * JetScalar(lie.gram(p, q));
      for (int c = 0; c < lie.dim(); ++c)
        if (!T(q, c).is_zero()) out[c] += w * T(q, c);
    }
  }
  return out;
}
/// kappa contraction of slot 2 of T with x.
inline LieVec contract2(const LieData& lie, const Ten2& T, const LieVec& x) {
  return contract1(lie, x, T.transposed());
}

/// B(a (x) 1, A) for a loop or form a with finite principal support: a series in the second variable,
/// evaluated on degrees [lo, hi] at every puncture. Entries are nullopt where the kernel is unknown.
inline std::vector<std::vector<Opt1>> pair_first(const LieData& lie, const Series2& A, const LaurentVec& a, int lo,
                                                 int hi) {
  const int ell = A.ell();
  std::vector<std::vector<Opt1>> out(ell, std::vector<Opt1>(hi - lo + 1, LieVec(lie.dim())));
  for (int j = 0; j < ell; ++j)
    for (int f = lo; f <= hi; ++f) {
      LieVec acc(lie.dim());
      bool ok = true;
      for (int i = 0; i < ell && ok; ++i) {
        // degrees of a above its certified window would meet kernel coefficients down to xlo
        if (a[i].certified_to() < -1 - A.xlo(i, j, f)) {
          ok = false;
          break;
        }
        auto [alo, ahi] = support(a[i]);
        for (int g = alo; g <= ahi; ++g) {
          const int e = -1 - g;
          if (e < A.xlo(i, j, f)) continue;
          if (a[i].at(g).is_zero()) continue;
          Opt2 T = A.at(i, j, e, f);
          if (!T) {
            ok = false;
            break;
          }
          acc = acc + contract1(lie, a[i].at(g), *T);
        }
      }
      out[j][f - lo] = ok ? Opt1(acc) : std::nullopt;
    }
  return out;
}

/// B(1 (x) a, A): a series in the first variable on degrees [lo, hi].
inline std::vector<std::vector<Opt1>> pair_second(const LieData& lie, const Series2& A, const LaurentVec& a, int lo,
                                                  int hi) {
  const int ell = A.ell();
  std::vector<std::vector<Opt1>> out(ell, std::vector<Opt1>(hi - lo + 1, LieVec(lie.dim())));
  for (int i = 0; i < ell; ++i)
    for (int e = lo; e <= hi; ++e) {
      LieVec acc(lie.dim());
      bool ok = true;
      for (int j = 0; j < ell && ok; ++j) {
        if (a[j].certified_to() < -1 - A.ylo(i, j, e)) {
          ok = false;
          break;
        }
        auto [alo, ahi] = support(a[j]);
        for (int g = alo; g <= ahi; ++g) {
          const int f = -1 - g;
          if (f < A.ylo(i, j, e)) continue;
          if (a[j].at(g).is_zero()) continue;
          Opt2 T = A.at(i, j, e, f);
          if (!T) {
            ok = false;
            break;
          }
          acc = acc + contract2(lie, *T, a[j].at(g));
        }
      }
      out[i][e - lo] = ok ? Opt1(acc) : std::nullopt;
    }
  return out;
}

enum class Projection { PlusLoop, MinusLoop, PlusForm, MinusForm };

/// Kernel path: Pi_+ a = B(a (x) 1, r), Pi_- a = B(1 (x) a, rbar), Pi_+^* w = B(1 (x) w, r),
/// Pi_-^* w = B(w (x) 1, rbar). Degrees [lo, hi] at every puncture.
inline std::vector<std::vector<Opt1>> project_kernel(const KernelSet& ks, Projection which, const LaurentVec& a,
                                                     int lo, int hi) {
  switch (which) {
    case Projection::PlusLoop:
      return pair_first(ks.lie(), ks.r(), a, lo, hi);
    case Projection::MinusLoop:
      return pair_second(ks.lie(), ks.rbar(), a, lo, hi);
    case Projection::PlusForm:
      return pair_second(ks.lie(), ks.r(), a, lo, hi);
    case Projection::MinusForm:
      return pair_first(ks.lie(), ks.rbar(), a, lo, hi);
  }
  return {};
}

/// Direct decomposition of a loop: a = a_+ + sum c_alpha xi_alpha + Ad(sigma^-1) sum g_jb I_b f_j.
struct LoopDecomposition {
  std::vector<JetScalar> c;  // xi coefficients
  std::vector<JetScalar> g;  // outer coefficients, index j * d + b
  int pole_bound = 0;
};

inline LoopDecomposition decompose_loop(const BundleChart& chart, const LaurentVec& a, int slack = 2) {
  const int d = chart.dim(), ell = chart.ell(), m = chart.m();
  int pa = 0;
  for (auto& blk : a) pa = std::max(pa, -std::min(0, support(blk).first));
  for (int attempt = 0; attempt < 6; ++attempt, slack *= 2) {
    const int Q = pa + chart.sigma_shift() + slack;
    const int nf = chart.basis_count(OuterKind::Function, Q);
    const int unknowns = m + nf * d;
    std::vector<std::vector<Laurent<LieVec>>> T(ell);
    int emin = -pa;
    for (int i = 0; i < ell; ++i)
      for (int j = 0; j < nf; ++j)
        for (int b = 0; b < d; ++b) {
          T[i].push_back(chart.conj_expansion(OuterKind::Function, i, j, b, -1));
          emin = std::min(emin, T[i].back().valuation());
        }
    JetMatrix A, B;
    for (int i = 0; i < ell; ++i) {
      emin = std::min(emin, chart.xi_coords(0, i).lo());
      for (int e = emin; e <= -1; ++e)
        for (int p = 0; p < d; ++p) {
          std::vector<JetScalar> row(unknowns);
          bool any = false;
          for (int al = 0; al < m; ++al) {
            const auto& X = chart.xi_coords(al, i);
            if (e >= X.lo() && e <= X.stored_hi()) row[al] = X.at(e)[p];
            any = any || !row[al].is_zero();
          }
          for (int u = 0; u < nf * d; ++u) {
            row[m + u] = T[i][u].at(e)[p];
            any = any || !row[m + u].is_zero();
          }
          JetScalar rhs;
          if (e >= a[i].lo() && e <= a[i].stored_hi()) rhs = a[i].at(e)[p];
          if (!any && rhs.is_zero()) continue;
          A.push_back(std::move(row));
          B.push_back({rhs});
        }
    }
    JetSolution sol = solve_jets(std::move(A), std::move(B), chart.jet_order());
    if (sol.rank_at_base < unknowns)
      throw Error(ErrorCode::SingularSystem, "decomposition rank " + std::to_string(sol.rank_at_base));
    if (!sol.consistent) continue;
    LoopDecomposition out;
    out.pole_bound = Q;
    for (int al = 0; al < m; ++al) out.c.push_back(sol.X[al][0]);
    for (int u = 0; u < nf * d; ++u) out.g.push_back(sol.X[m + u][0]);
    return out;
  }
  throw Error(ErrorCode::PoleBoundTooSmall, "loop decomposition");
}

/// V-part of a loop (Pi_- a) at puncture i, certified through certTo.
inline Laurent<LieVec> loop_v_part(const BundleChart& chart, const LoopDecomposition& dec, int i, int certTo) {
  const int d = chart.dim();
  Laurent<LieVec> out(i, 0, certTo, 0, LieVec(d));
  for (int al = 0; al < chart.m(); ++al)
    if (!dec.c[al].is_zero()) out = out + laurent_scale(chart.xi_coords(al, i).truncated(certTo), dec.c[al]);
  for (size_t u = 0; u < dec.g.size(); ++u) {
    if (dec.g[u].is_zero()) continue;
    const int j = static_cast<int>(u) / d, b = static_cast<int>(u) % d;
    out = out + laurent_scale(chart.conj_expansion(OuterKind::Function, i, j, b, certTo), dec.g[u]);
  }
  return out.truncated(certTo);
}

/// Direct path for forms: Pi_+^* w is the unique element of V-perp with the principal parts of w.
inline GlobalFormVector decompose_form(const BundleChart& chart, const LaurentVec& w, int slack = 2) {
  int pw = 0;
  for (auto& blk : w) pw = std::max(pw, -std::min(0, support(blk).first));
  // one target per principal coefficient; the solutions are summed
  std::vector<FormTarget> parts;
  for (int i = 0; i < chart.ell(); ++i) {
    auto [lo, hi] = support(w[i]);
    for (int e = lo; e <= std::min(hi, -1); ++e) {
      FormTarget p;
      p.puncture = i;
      p.degree = e;
      p.value = w[i].at(e);
      parts.push_back(p);
    }
  }
  for (int attempt = 0; attempt < 6; ++attempt, slack *= 2) {
    try {
      auto sol = chart.solve_forms(pw + chart.sigma_shift() + slack, parts);
      GlobalFormVector G;
      for (auto& s : sol) {
        if (G.coeffs.empty()) G.coeffs.assign(s.coeffs.size(), LieVec(chart.dim()));
        for (size_t j = 0; j < s.coeffs.size(); ++j) G.coeffs[j] = G.coeffs[j] + s.coeffs[j];
      }
      if (G.coeffs.empty()) G.coeffs.assign(1, LieVec(chart.dim()));
      return G;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PoleBoundTooSmall) throw;
    }
  }
  throw Error(ErrorCode::PoleBoundTooSmall, "form decomposition");
}

}  // namespace dynr
