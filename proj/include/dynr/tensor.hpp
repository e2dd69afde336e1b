#pragma once
// Lazily evaluated one-, two- and three-variable series valued in g, g (x) g and g (x) g (x) g.
// A coefficient is std::nullopt when the data needed to compute it is unavailable; products
// propagate that, so the set of known coefficients is exactly the certified window.

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "dynr/lie.hpp"

namespace dynr {

/// Components against I_p (x) I_q.
struct Ten2 {
  int d = 0;
  std::vector<JetScalar> v;

  Ten2() = default;
  explicit Ten2(int dim) : d(dim), v(static_cast<size_t>(dim) * dim) {}
  JetScalar& operator()(int p, int q) { return v[static_cast<size_t>(p) * d + q]; }
  const JetScalar& operator()(int p, int q) const { return v[static_cast<size_t>(p) * d + q]; }
  static Ten2 outer(const LieVec& a, const LieVec& b) {
    Ten2 t(a.dim());
    for (int p = 0; p < t.d; ++p)
      if (!a[p].is_zero())
        for (int q = 0; q < t.d; ++q)
          if (!b[q].is_zero()) t(p, q) = a[p] * b[q];
    return t;
  }
  Ten2 transposed() const {
    Ten2 t(d);
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) t(q, p) = (*this)(p, q);
    return t;
  }
  bool is_zero() const {
    for (auto& x : v)
      if (!x.is_zero()) return false;
    return true;
  }
  template <class F>
  Ten2 map(F f) const {
    Ten2 t(d);
    for (size_t k = 0; k < v.size(); ++k) t.v[k] = f(v[k]);
    return t;
  }
  Ten2& operator+=(const Ten2& o) {
    for (size_t k = 0; k < v.size(); ++k)
      if (!o.v[k].is_zero()) v[k] += o.v[k];
    return *this;
  }
  Ten2& operator-=(const Ten2& o) {
    for (size_t k = 0; k < v.size(); ++k)
      if (!o.v[k].is_zero()) v[k] = v[k] - o.v[k];
    return *this;
  }
  friend Ten2 operator+(Ten2 a, const Ten2& b) { return a += b; }
  friend Ten2 operator-(Ten2 a, const Ten2& b) { return a -= b; }
  friend Ten2 operator*(const Ten2& a, const JetScalar& s) {
    return a.map([&](const JetScalar& x) { return x * s; });
  }
  friend bool operator==(const Ten2& a, const Ten2& b) { return (a - b).is_zero(); }
};

/// Components against I_p (x) I_q (x) I_r.
struct Ten3 {
  int d = 0;
  std::vector<JetScalar> v;

  Ten3() = default;
  explicit Ten3(int dim) : d(dim), v(static_cast<size_t>(dim) * dim * dim) {}
  JetScalar& operator()(int p, int q, int r) { return v[(static_cast<size_t>(p) * d + q) * d + r]; }
  const JetScalar& operator()(int p, int q, int r) const { return v[(static_cast<size_t>(p) * d + q) * d + r]; }
  bool is_zero() const {
    for (auto& x : v)
      if (!x.is_zero()) return false;
    return true;
  }
  template <class F>
  Ten3 map(F f) const {
    Ten3 t(d);
    for (size_t k = 0; k < v.size(); ++k) t.v[k] = f(v[k]);
    return t;
  }
  Ten3& operator+=(const Ten3& o) {
    for (size_t k = 0; k < v.size(); ++k)
      if (!o.v[k].is_zero()) v[k] += o.v[k];
    return *this;
  }
  Ten3& operator-=(const Ten3& o) {
    for (size_t k = 0; k < v.size(); ++k)
      if (!o.v[k].is_zero()) v[k] = v[k] - o.v[k];
    return *this;
  }
  friend Ten3 operator+(Ten3 a, const Ten3& b) { return a += b; }
  friend Ten3 operator-(Ten3 a, const Ten3& b) { return a -= b; }
  friend bool operator==(const Ten3& a, const Ten3& b) { return (a - b).is_zero(); }
};

using Opt1 = std::optional<LieVec>;
using Opt2 = std::optional<Ten2>;
using Opt3 = std::optional<Ten3>;

/// g-valued series per puncture; zero below lo(i) and above hi(i).
struct Series1 {
  int ell = 0, d = 0;
  std::function<int(int)> lo, hi;
  std::function<Opt1(int, int)> coeff;

  Opt1 at(int i, int e) const {
    if (e < lo(i) || e > hi(i)) return LieVec(d);
    return coeff(i, e);
  }
};

/// Memoized g (x) g series in (x_i, y_j). xlo(i,j,f) bounds the x-degrees at y-degree f from below,
/// ylo(i,j,e) bounds the y-degrees at x-degree e; coefficients outside are zero. Both bounds must be
/// nonincreasing in their degree argument.
class Series2 {
 public:
  using Coeff = std::function<Opt2(int, int, int, int)>;
  using Bound = std::function<int(int, int, int)>;

  Series2() = default;
  Series2(int ell, int d, Bound xlo, Bound ylo, Coeff c)
      : ell_(ell), d_(d), xlo_(std::move(xlo)), ylo_(std::move(ylo)), impl_(std::make_shared<Impl>()) {
    impl_->coeff = std::move(c);
  }
  int ell() const { return ell_; }
  int dim() const { return d_; }
  int xlo(int i, int j, int f) const { return xlo_(i, j, f); }
  int ylo(int i, int j, int e) const { return ylo_(i, j, e); }

  Opt2 at(int i, int j, int e, int f) const {
    if (e < xlo_(i, j, f) || f < ylo_(i, j, e)) return Ten2(d_);
    const std::array<int, 4> key{i, j, e, f};
    {
      std::lock_guard<std::mutex> lock(impl_->mu);
      auto it = impl_->memo.find(key);
      if (it != impl_->memo.end()) return it->second;
    }
    Opt2 v = impl_->coeff(i, j, e, f);
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->memo.emplace(key, v);
    return v;
  }

 private:
  struct Impl {
    std::mutex mu;
    Coeff coeff;
    std::map<std::array<int, 4>, Opt2> memo;
  };
  int ell_ = 0, d_ = 0;
  Bound xlo_, ylo_;
  std::shared_ptr<Impl> impl_;
};

/// g (x) g (x) g series in (x_i, y_j, z_k), not memoized (evaluated once per window point).
struct Series3 {
  int ell = 0, d = 0;
  std::function<Opt3(int, int, int, int, int, int)> coeff;
  Opt3 at(int i, int j, int k, int a, int b, int c) const { return coeff(i, j, k, a, b, c); }
};

// ---- Series2 algebra ----

inline Series2 operator+(const Series2& A, const Series2& B) {
  return Series2(
      A.ell(), A.dim(), [=](int i, int j, int f) { return std::min(A.xlo(i, j, f), B.xlo(i, j, f)); },
      [=](int i, int j, int e) { return std::min(A.ylo(i, j, e), B.ylo(i, j, e)); },
      [=](int i, int j, int e, int f) -> Opt2 {
        Opt2 a = A.at(i, j, e, f), b = B.at(i, j, e, f);
        if (!a || !b) return std::nullopt;
        return *a + *b;
      });
}
inline Series2 operator-(const Series2& A, const Series2& B) {
  return Series2(
      A.ell(), A.dim(), [=](int i, int j, int f) { return std::min(A.xlo(i, j, f), B.xlo(i, j, f)); },
      [=](int i, int j, int e) { return std::min(A.ylo(i, j, e), B.ylo(i, j, e)); },
      [=](int i, int j, int e, int f) -> Opt2 {
        Opt2 a = A.at(i, j, e, f), b = B.at(i, j, e, f);
        if (!a || !b) return std::nullopt;
        return *a - *b;
      });
}
/// Apply f to every jet entry (truncation, derivation).
template <class F>
Series2 map_jets(const Series2& A, F f) {
  return Series2(
      A.ell(), A.dim(), [=](int i, int j, int g) { return A.xlo(i, j, g); },
      [=](int i, int j, int e) { return A.ylo(i, j, e); },
      [=](int i, int j, int e, int g) -> Opt2 {
        Opt2 a = A.at(i, j, e, g);
        if (!a) return std::nullopt;
        return a->map(f);
      });
}
/// tau(A(y, x)): swap variables and tensor factors.
inline Series2 flip(const Series2& A) {
  return Series2(
      A.ell(), A.dim(), [=](int i, int j, int f) { return A.ylo(j, i, f); },
      [=](int i, int j, int e) { return A.xlo(j, i, e); },
      [=](int i, int j, int e, int f) -> Opt2 {
        Opt2 a = A.at(j, i, f, e);
        if (!a) return std::nullopt;
        return a->transposed();
      });
}
/// a(x) (x) b(y).
inline Series2 outer(const Series1& a, const Series1& b) {
  return Series2(
      a.ell, a.d, [=](int i, int, int) { return a.lo(i); }, [=](int, int j, int) { return b.lo(j); },
      [=](int i, int j, int e, int f) -> Opt2 {
        if (e > a.hi(i) || f > b.hi(j)) return Ten2(a.d);
        Opt1 x = a.at(i, e), y = b.at(j, f);
        if (!x || !y) return std::nullopt;
        return Ten2::outer(*x, *y);
      });
}

/// [w (x) 1, A] (slot 1, product in x) when slot1 = true, else [1 (x) w, A] (slot 2, product in y).
inline Series2 ad_slot(const LieData& lie, const Series1& w, const Series2& A, bool slot1) {
  const auto fnz = lie.nonzero_structure();
  const int d = A.dim();
  return Series2(
      A.ell(), d,
      [=](int i, int j, int f) { return slot1 ? w.lo(i) + A.xlo(i, j, f) : A.xlo(i, j, f - w.lo(j)); },
      [=](int i, int j, int e) { return slot1 ? A.ylo(i, j, e - w.lo(i)) : w.lo(j) + A.ylo(i, j, e); },
      [=](int i, int j, int e, int f) -> Opt2 {
        Ten2 out(d);
        const int pu = slot1 ? i : j;
        const int top = slot1 ? e - A.xlo(i, j, f) : f - A.ylo(i, j, e);
        for (int p = w.lo(pu); p <= std::min(w.hi(pu), top); ++p) {
          Opt1 wp = w.at(pu, p);
          if (!wp) return std::nullopt;
          if (wp->is_zero()) continue;
          Opt2 a = slot1 ? A.at(i, j, e - p, f) : A.at(i, j, e, f - p);
          if (!a) return std::nullopt;
          if (a->is_zero()) continue;
          for (auto& s : fnz) {
            const JetScalar& x = (*wp)[s.a];
            if (x.is_zero()) continue;
            const JetScalar xv = x * JetScalar(s.v);
            for (int q = 0; q < d; ++q) {
              if (slot1) {
                const JetScalar& y = (*a)(s.b, q);
                if (!y.is_zero()) out(s.c, q) += xv * y;
              } else {
                const JetScalar& y = (*a)(q, s.b);
                if (!y.is_zero()) out(q, s.c) += xv * y;
              }
            }
          }
        }
        return out;
      });
}

// ---- Series3 products ----
// Slot conventions: [A^{12}, B^{13}] = sum [a, b] (x) a' (x) b', and so on.

inline Series3 operator+(const Series3& A, const Series3& B) {
  return {A.ell, A.d, [=](int i, int j, int k, int a, int b, int c) -> Opt3 {
            Opt3 x = A.at(i, j, k, a, b, c), y = B.at(i, j, k, a, b, c);
            if (!x || !y) return std::nullopt;
            return *x + *y;
          }};
}
inline Series3 operator-(const Series3& A, const Series3& B) {
  return {A.ell, A.d, [=](int i, int j, int k, int a, int b, int c) -> Opt3 {
            Opt3 x = A.at(i, j, k, a, b, c), y = B.at(i, j, k, a, b, c);
            if (!x || !y) return std::nullopt;
            return *x - *y;
          }};
}

/// [A^{12}, B^{13}]: shared slot 1, product in x.
inline Series3 bracket_12_13(const LieData& lie, const Series2& A, const Series2& B) {
  const auto fnz = lie.nonzero_structure();
  const int d = A.dim();
  return {A.ell(), d, [=](int i, int j, int k, int a, int b, int c) -> Opt3 {
            Ten3 out(d);
            for (int p = A.xlo(i, j, b); p <= a - B.xlo(i, k, c); ++p) {
              Opt2 x = A.at(i, j, p, b);
              if (!x) return std::nullopt;
              if (x->is_zero()) continue;
              Opt2 y = B.at(i, k, a - p, c);
              if (!y) return std::nullopt;
              if (y->is_zero()) continue;
              for (auto& s : fnz)
                for (int q = 0; q < d; ++q) {
                  const JetScalar& xq = (*x)(s.a, q);
                  if (xq.is_zero()) continue;
                  const JetScalar xv = xq * JetScalar(s.v);
                  for (int r = 0; r < d; ++r) {
                    const JetScalar& yr = (*y)(s.b, r);
                    if (!yr.is_zero()) out(s.c, q, r) += xv * yr;
                  }
                }
            }
            return out;
          }};
}

/// [A^{12}, B^{23}]: shared slot 2, product in y.
inline Series3 bracket_12_23(const LieData& lie, const Series2& A, const Series2& B) {
  const auto fnz = lie.nonzero_structure();
  const int d = A.dim();
  return {A.ell(), d, [=](int i, int j, int k, int a, int b, int c) -> Opt3 {
            Ten3 out(d);
            for (int q = A.ylo(i, j, a); q <= b - B.xlo(j, k, c); ++q) {
              Opt2 x = A.at(i, j, a, q);
              if (!x) return std::nullopt;
              if (x->is_zero()) continue;
              Opt2 y = B.at(j, k, b - q, c);
              if (!y) return std::nullopt;
              if (y->is_zero()) continue;
              for (auto& s : fnz)
                for (int p = 0; p < d; ++p) {
                  const JetScalar& xp = (*x)(p, s.a);
                  if (xp.is_zero()) continue;
                  const JetScalar xv = xp * JetScalar(s.v);
                  for (int r = 0; r < d; ++r) {
                    const JetScalar& yr = (*y)(s.b, r);
                    if (!yr.is_zero()) out(p, s.c, r) += xv * yr;
                  }
                }
            }
            return out;
          }};
}

/// [A^{13}, B^{23}]: shared slot 3, product in z.
inline Series3 bracket_13_23(const LieData& lie, const Series2& A, const Series2& B) {
  const auto fnz = lie.nonzero_structure();
  const int d = A.dim();
  return {A.ell(), d, [=](int i, int j, int k, int a, int b, int c) -> Opt3 {
            Ten3 out(d);
            for (int q = A.ylo(i, k, a); q <= c - B.ylo(j, k, b); ++q) {
              Opt2 x = A.at(i, k, a, q);
              if (!x) return std::nullopt;
              if (x->is_zero()) continue;
              Opt2 y = B.at(j, k, b, c - q);
              if (!y) return std::nullopt;
              if (y->is_zero()) continue;
              for (auto& s : fnz)
                for (int p = 0; p < d; ++p) {
                  const JetScalar& xp = (*x)(p, s.a);
                  if (xp.is_zero()) continue;
                  const JetScalar xv = xp * JetScalar(s.v);
                  for (int r = 0; r < d; ++r) {
                    const JetScalar& yr = (*y)(r, s.b);
                    if (!yr.is_zero()) out(p, r, s.c) += xv * yr;
                  }
                }
            }
            return out;
          }};
}

/// w^{(1)} B^{(23)}: w(x) (x) B(y, z).
inline Series3 outer_1_23(const Series1& w, const Series2& B) {
  const int d = B.dim();
  return {B.ell(), d, [=](int i, int j, int k, int a, int b, int c) -> Opt3 {
            Opt1 x = w.at(i, a);
            if (!x) return std::nullopt;
            if (x->is_zero()) return Ten3(d);
            Opt2 y = B.at(j, k, b, c);
            if (!y) return std::nullopt;
            Ten3 out(d);
            for (int p = 0; p < d; ++p)
              if (!(*x)[p].is_zero())
                for (int q = 0; q < d; ++q)
                  for (int r = 0; r < d; ++r)
                    if (!(*y)(q, r).is_zero()) out(p, q, r) = (*x)[p] * (*y)(q, r);
            return out;
          }};
}

/// w^{(2)} B^{(13)}: B(x, z) with w(y) in the middle slot.
inline Series3 outer_2_13(const Series1& w, const Series2& B) {
  const int d = B.dim();
  return {B.ell(), d, [=](int i, int j, int k, int a, int b, int c) -> Opt3 {
            Opt1 x = w.at(j, b);
            if (!x) return std::nullopt;
            if (x->is_zero()) return Ten3(d);
            Opt2 y = B.at(i, k, a, c);
            if (!y) return std::nullopt;
            Ten3 out(d);
            for (int q = 0; q < d; ++q)
              if (!(*x)[q].is_zero())
                for (int p = 0; p < d; ++p)
                  for (int r = 0; r < d; ++r)
                    if (!(*y)(p, r).is_zero()) out(p, q, r) = (*y)(p, r) * (*x)[q];
            return out;
          }};
}

}  // namespace dynr
