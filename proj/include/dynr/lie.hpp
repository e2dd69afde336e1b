#pragma once
// sl_n data, small jet matrices, and Lie-algebra coordinate vectors.

#include <functional>
#include <string>
#include <vector>

#include "dynr/laurent.hpp"

namespace dynr {

/// Dense n x n matrix over the jet ring.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int n) : n_(n), a_(static_cast<size_t>(n) * n) {}
  static Mat identity(int n) {
    Mat m(n);
    for (int i = 0; i < n; ++i) m(i, i) = JetScalar(1);
    return m;
  }
  static Mat unit(int n, int i, int j, const JetScalar& c = JetScalar(1)) {
    Mat m(n);
    m(i, j) = c;
    return m;
  }

  int n() const { return n_; }
  JetScalar& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  const JetScalar& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
  bool is_zero() const {
    for (auto& x : a_)
      if (!x.is_zero()) return false;
    return true;
  }
  JetScalar trace() const {
    JetScalar t;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }
  Mat map(const std::function<JetScalar(const JetScalar&)>& f) const {
    Mat m(n_);
    for (size_t k = 0; k < a_.size(); ++k) m.a_[k] = f(a_[k]);
    return m;
  }
  Mat truncated(int order) const {
    return map([order](const JetScalar& x) { return x.truncated(order); });
  }
  Mat derive(int var) const {
    return map([var](const JetScalar& x) { return x.derive(var); });
  }

  friend Mat operator+(const Mat& a, const Mat& b) {
    Mat m = a.n_ ? a : Mat(b.n_);
    if (b.n_ == 0) return m;
    for (size_t k = 0; k < m.a_.size(); ++k) m.a_[k] += b.a_[k];
    return m;
  }
  friend Mat operator-(const Mat& a, const Mat& b) {
    Mat m = a.n_ ? a : Mat(b.n_);
    if (b.n_ == 0) return m;
    for (size_t k = 0; k < m.a_.size(); ++k) m.a_[k] -= b.a_[k];
    return m;
  }
  Mat operator-() const { return Mat(n_) - *this; }
  friend Mat operator*(const Mat& a, const Mat& b) {
    const int n = a.n_;
    Mat m(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const JetScalar& x = a(i, k);
        if (x.is_zero()) continue;
        for (int j = 0; j < n; ++j)
          if (!b(k, j).is_zero()) m(i, j) += x * b(k, j);
      }
    return m;
  }
  friend Mat operator*(const Mat& a, const JetScalar& s) {
    return a.map([&](const JetScalar& x) { return x * s; });
  }
  friend Mat operator*(const JetScalar& s, const Mat& a) { return a * s; }
  friend Mat operator*(const Mat& a, const Rational& s) { return a * JetScalar(s); }
  friend Mat operator*(const Rational& s, const Mat& a) { return a * JetScalar(s); }
  friend bool operator==(const Mat& a, const Mat& b) {
    if (a.n_ != b.n_) return (a - b).is_zero();
    for (size_t k = 0; k < a.a_.size(); ++k)
      if (a.a_[k] != b.a_[k]) return false;
    return true;
  }
  const std::vector<JetScalar>& entries() const { return a_; }

 private:
  int n_ = 0;
  std::vector<JetScalar> a_;
};

inline Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }
inline bool coeff_is_zero(const Mat& m) { return m.is_zero(); }
inline Mat coeff_zero(const Mat& m) { return Mat(m.n()); }

/// Coordinates of an element of g in the basis I_a.
class LieVec {
 public:
  LieVec() = default;
  explicit LieVec(int d) : v_(static_cast<size_t>(d)) {}
  int dim() const { return static_cast<int>(v_.size()); }
  JetScalar& operator[](int a) { return v_[a]; }
  const JetScalar& operator[](int a) const { return v_[a]; }
  bool is_zero() const {
    for (auto& x : v_)
      if (!x.is_zero()) return false;
    return true;
  }
  LieVec map(const std::function<JetScalar(const JetScalar&)>& f) const {
    LieVec w(dim());
    for (int a = 0; a < dim(); ++a) w.v_[a] = f(v_[a]);
    return w;
  }
  LieVec truncated(int order) const {
    return map([order](const JetScalar& x) { return x.truncated(order); });
  }
  LieVec derive(int var) const {
    return map([var](const JetScalar& x) { return x.derive(var); });
  }
  friend LieVec operator+(const LieVec& a, const LieVec& b) {
    if (a.v_.empty()) return b;
    if (b.v_.empty()) return a;
    LieVec w = a;
    for (int k = 0; k < a.dim(); ++k) w.v_[k] += b.v_[k];
    return w;
  }
  friend LieVec operator-(const LieVec& a, const LieVec& b) {
    LieVec w = a.v_.empty() ? LieVec(b.dim()) : a;
    if (b.v_.empty()) return w;
    for (int k = 0; k < w.dim(); ++k) w.v_[k] -= b.v_[k];
    return w;
  }
  friend LieVec operator*(const LieVec& a, const JetScalar& s) {
    return a.map([&](const JetScalar& x) { return x * s; });
  }
  friend LieVec operator*(const JetScalar& s, const LieVec& a) { return a * s; }
  friend LieVec operator*(const LieVec& a, const Rational& s) { return a * JetScalar(s); }
  friend LieVec operator*(const Rational& s, const LieVec& a) { return a * JetScalar(s); }
  friend bool operator==(const LieVec& a, const LieVec& b) {
    const int d = std::max(a.dim(), b.dim());
    for (int k = 0; k < d; ++k) {
      JetScalar x = k < a.dim() ? a.v_[k] : JetScalar(), y = k < b.dim() ? b.v_[k] : JetScalar();
      if (x != y) return false;
    }
    return true;
  }

 private:
  std::vector<JetScalar> v_;
};

inline bool coeff_is_zero(const LieVec& v) { return v.is_zero(); }
inline LieVec coeff_zero(const LieVec& v) { return LieVec(v.dim()); }

/// sl_n with basis E_ij, E_ji (i<j) then H_k = E_kk - E_{k+1,k+1}; trace form.
class LieData {
 public:
  explicit LieData(int n = 2) : n_(n), d_(n * n - 1) {
    if (n < 2) throw Error(ErrorCode::ConfigError, "n must be at least 2");
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        basis_.push_back(Mat::unit(n, i, j));
        basis_.push_back(Mat::unit(n, j, i));
      }
    for (int k = 0; k + 1 < n; ++k) {
      Mat h(n);
      h(k, k) = JetScalar(1);
      h(k + 1, k + 1) = JetScalar(-1);
      basis_.push_back(h);
    }
    gram_.assign(d_, std::vector<Rational>(d_));
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b) gram_[a][b] = (basis_[a] * basis_[b]).trace().constant();
    gram_inv_ = invert(gram_);
    for (int a = 0; a < d_; ++a) {
      Mat m(n);
      for (int b = 0; b < d_; ++b)
        if (sgn(gram_inv_[a][b]) != 0) m = m + basis_[b] * gram_inv_[a][b];
      dual_.push_back(m);
    }
    f_.assign(static_cast<size_t>(d_) * d_ * d_, Rational(0));
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b) {
        LieVec c = coords(commutator(basis_[a], basis_[b]));
        for (int k = 0; k < d_; ++k) f_[idx(a, b, k)] = c[k].constant();
      }
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b)
        for (int k = 0; k < d_; ++k)
          if (sgn(f_[idx(a, b, k)]) != 0) fnz_.push_back({a, b, k, f_[idx(a, b, k)]});
  }

  int n() const { return n_; }
  int dim() const { return d_; }
  const Mat& basis(int a) const { return basis_[a]; }
  const Mat& dual(int a) const { return dual_[a]; }
  const Rational& gram(int a, int b) const { return gram_[a][b]; }
  const Rational& gram_inv(int a, int b) const { return gram_inv_[a][b]; }
  /// [I_a, I_b] = sum_c f(a,b,c) I_c
  const Rational& f(int a, int b, int c) const { return f_[idx(a, b, c)]; }
  struct StructConst {
    int a, b, c;
    Rational v;
  };
  const std::vector<StructConst>& nonzero_structure() const { return fnz_; }

  /// Casimir gamma = sum_a I_a (x) I^a in basis components: gamma_{ab} = gram_inv(a, b).
  Rational gamma(int a, int b) const { return gram_inv_[a][b]; }

  LieVec coords(const Mat& x) const {
    LieVec v(d_);
    for (int a = 0; a < d_; ++a) v[a] = trace_product(x, dual_[a]);
    return v;
  }
  Mat matrix(const LieVec& v) const {
    Mat m(n_);
    for (int a = 0; a < d_; ++a)
      if (!v[a].is_zero()) m = m + basis_[a] * v[a];
    return m;
  }
  JetScalar kappa(const LieVec& x, const LieVec& y) const {
    JetScalar s;
    for (int a = 0; a < d_; ++a) {
      if (x[a].is_zero()) continue;
      for (int b = 0; b < d_; ++b)
        if (sgn(gram_[a][b]) != 0 && !y[b].is_zero()) s += x[a] * y[b] * JetScalar(gram_[a][b]);
    }
    return s;
  }
  LieVec bracket(const LieVec& x, const LieVec& y) const {
    LieVec z(d_);
    for (auto& s : fnz_)
      if (!x[s.a].is_zero() && !y[s.b].is_zero()) z[s.c] += x[s.a] * y[s.b] * JetScalar(s.v);
    return z;
  }
  LieVec unit(int a) const {
    LieVec v(d_);
    v[a] = JetScalar(1);
    return v;
  }
  /// Coordinates of the dual basis element I^a.
  LieVec dual_coords(int a) const {
    LieVec v(d_);
    for (int b = 0; b < d_; ++b) v[b] = JetScalar(gram_inv_[a][b]);
    return v;
  }

  static JetScalar trace_product(const Mat& x, const Mat& y) {
    JetScalar s;
    const int n = x.n();
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (!x(i, k).is_zero() && !y(k, i).is_zero()) s += x(i, k) * y(k, i);
    return s;
  }

 private:
  size_t idx(int a, int b, int c) const { return (static_cast<size_t>(a) * d_ + b) * d_ + c; }
  static std::vector<std::vector<Rational>> invert(std::vector<std::vector<Rational>> m) {
    const int d = static_cast<int>(m.size());
    std::vector<std::vector<Rational>> inv(d, std::vector<Rational>(d));
    for (int i = 0; i < d; ++i) inv[i][i] = 1;
    for (int c = 0; c < d; ++c) {
      int p = c;
      while (p < d && sgn(m[p][c]) == 0) ++p;
      if (p == d) throw Error(ErrorCode::Internal, "degenerate trace form");
      std::swap(m[p], m[c]);
      std::swap(inv[p], inv[c]);
      Rational s = 1 / m[c][c];
      for (int k = 0; k < d; ++k) {
        m[c][k] *= s;
        inv[c][k] *= s;
      }
      for (int r = 0; r < d; ++r) {
        if (r == c || sgn(m[r][c]) == 0) continue;
        Rational t = m[r][c];
        for (int k = 0; k < d; ++k) {
          m[r][k] -= t * m[c][k];
          inv[r][k] -= t * inv[c][k];
        }
      }
    }
    return inv;
  }

  int n_, d_;
  std::vector<Mat> basis_, dual_;
  std::vector<std::vector<Rational>> gram_, gram_inv_;
  std::vector<Rational> f_;
  std::vector<StructConst> fnz_;
};

}  // namespace dynr
